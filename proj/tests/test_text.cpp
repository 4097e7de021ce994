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

#include "test_support.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dyadic {
namespace {

using testing::error_code_of;

TEST(FormatReal, RoundTripsExactly)
{
    std::mt19937_64 rng(7);
    for (double v : testing::random_vector(500, rng, 1e3)) {
        const double scaled = v * std::exp2(static_cast<int>(rng() % 200) - 100);
        EXPECT_EQ(parse_real(format_real(scaled), "value"), scaled);
    }
    EXPECT_EQ(format_real(0.5), "0.5");
    EXPECT_EQ(format_real(0.1), "0.10000000000000001");
    EXPECT_EQ(format_real(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(format_real(std::nan("")), "nan");
}

TEST(ParseReal, StrictOnTrailingGarbage)
{
    EXPECT_DOUBLE_EQ(parse_real("  2.5e-3 ", "x"), 2.5e-3);
    EXPECT_EQ(error_code_of([] { (void)parse_real("2.5x", "x"); }), ErrorCode::Config);
    EXPECT_EQ(error_code_of([] { (void)parse_real("", "x"); }), ErrorCode::Config);
    EXPECT_EQ(error_code_of([] { (void)parse_int("3.0", "n"); }), ErrorCode::Config);
    EXPECT_EQ(error_code_of([] { (void)parse_uint("-1", "n"); }), ErrorCode::Config);
    EXPECT_EQ(parse_int("-12", "n"), -12);
    EXPECT_EQ(parse_uint("18446744073709551615", "n"), 18446744073709551615ULL);
}

TEST(ParseLists, CommaSeparated)
{
    const auto reals = parse_real_list("1, 2.5,-3", "v");
    ASSERT_EQ(reals.size(), 3u);
    EXPECT_EQ(reals[2], -3.0);
    const auto ints = parse_int_list("1,2,5", "offsets");
    EXPECT_EQ(ints, (std::vector<std::int64_t>{1, 2, 5}));
    EXPECT_EQ(join_reals(reals), "1,2.5,-3");
    EXPECT_EQ(error_code_of([] { (void)parse_real_list("1,,2", "v"); }), ErrorCode::Config);
}

TEST(KeyValues, CommentsDuplicatesAndBlanks)
{
    const auto kv = parse_key_values("# header\n a = 1 \n\nb=two words\n");
    EXPECT_EQ(kv.size(), 2u);
    EXPECT_EQ(kv.at("a"), "1");
    EXPECT_EQ(kv.at("b"), "two words");
    EXPECT_EQ(error_code_of([] { (void)parse_key_values("a=1\na=2\n"); }), ErrorCode::Config);
    EXPECT_EQ(error_code_of([] { (void)parse_key_values("novalue\n"); }), ErrorCode::Config);
    EXPECT_EQ(error_code_of([] { (void)parse_key_values("=3\n"); }), ErrorCode::Config);
}

TEST(Csv, RowsAreCommaJoined)
{
    std::ostringstream out;
    const std::vector<std::string> cells{"a", "1", "2.5"};
    write_csv_row(out, cells);
    EXPECT_EQ(out.str(), "a,1,2.5\n");
}

} // namespace
} // namespace dyadic
