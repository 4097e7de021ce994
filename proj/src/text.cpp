/*
 * Copyright 2026 The Dyadic Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "dyadic/text.hpp"

#include "dyadic/error.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace dyadic {

std::string format_real(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buffer[64];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                   std::chars_format::general, 17);
    if (ec != std::errc{}) {
        fail(ErrorCode::InvalidArgument, "cannot format floating-point value");
    }
    return std::string(buffer, end);
}

std::string_view trim(std::string_view text)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

namespace {

std::string bad_value(std::string_view text, std::string_view what, const char* kind)
{
    return "expected " + std::string(kind) + " for '" + std::string(what) + "', got '" +
           std::string(text) + "'";
}

template <class Int>
Int parse_integer(std::string_view text, std::string_view what, const char* kind)
{
    text = trim(text);
    Int value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        fail(ErrorCode::Config, bad_value(text, what, kind));
    }
    return value;
}

std::vector<std::string_view> split(std::string_view text, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        parts.push_back(trim(text.substr(start, pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return parts;
}

} // namespace

double parse_real(std::string_view text, std::string_view what)
{
    text = trim(text);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        fail(ErrorCode::Config, bad_value(text, what, "a real number"));
    }
    return value;
}

std::int64_t parse_int(std::string_view text, std::string_view what)
{
    return parse_integer<std::int64_t>(text, what, "an integer");
}

std::uint64_t parse_uint(std::string_view text, std::string_view what)
{
    return parse_integer<std::uint64_t>(text, what, "a nonnegative integer");
}

std::vector<double> parse_real_list(std::string_view text, std::string_view what)
{
    std::vector<double> values;
    for (auto part : split(trim(text), ',')) {
        values.push_back(parse_real(part, what));
    }
    return values;
}

std::vector<std::int64_t> parse_int_list(std::string_view text, std::string_view what)
{
    std::vector<std::int64_t> values;
    for (auto part : split(trim(text), ',')) {
        values.push_back(parse_int(part, what));
    }
    return values;
}

std::string join_reals(std::span<const double> values, char sep)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) {
            out += sep;
        }
        out += format_real(values[i]);
    }
    return out;
}

std::map<std::string, std::string> parse_key_values(std::string_view text)
{
    std::map<std::string, std::string> entries;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        const auto line = trim(text.substr(start, end == std::string_view::npos ? end : end - start));
        ++line_no;
        if (!line.empty() && line.front() != '#') {
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) {
                fail(ErrorCode::Config, "line " + std::to_string(line_no) + ": expected key=value");
            }
            const std::string key(trim(line.substr(0, eq)));
            const std::string value(trim(line.substr(eq + 1)));
            if (key.empty()) {
                fail(ErrorCode::Config, "line " + std::to_string(line_no) + ": empty key");
            }
            if (!entries.emplace(key, value).second) {
                fail(ErrorCode::Config, "duplicate key '" + key + "'");
            }
        }
        if (end == std::string_view::npos) {
            break;
        }
        start = end + 1;
    }
    return entries;
}

void write_csv_row(std::ostream& out, std::span<const std::string> cells)
{
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) {
            out << ',';
        }
        out << cells[i];
    }
    out << '\n';
}

} // namespace dyadic
