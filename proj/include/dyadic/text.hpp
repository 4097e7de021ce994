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
#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dyadic {

/// Shortest round-trip-safe text for a double: 17 significant digits,
/// '.' decimal point regardless of the process locale.
std::string format_real(double value);

/// Strict parsers; throw Error(ErrorCode::Config) naming `what` on failure.
double parse_real(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);
std::uint64_t parse_uint(std::string_view text, std::string_view what);
std::vector<double> parse_real_list(std::string_view text, std::string_view what);
std::vector<std::int64_t> parse_int_list(std::string_view text, std::string_view what);

std::string join_reals(std::span<const double> values, char sep = ',');

std::string_view trim(std::string_view text);

/// Parses `key = value` lines. Blank lines and lines starting with '#' are
/// ignored. Duplicate keys and lines without '=' are config errors.
std::map<std::string, std::string> parse_key_values(std::string_view text);

/// Writes a CSV row of already-formatted cells.
void write_csv_row(std::ostream& out, std::span<const std::string> cells);

} // namespace dyadic
