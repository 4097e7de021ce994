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
#include "dyadic/philox.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace dyadic {
namespace {

using Ctr = Philox4x32::Counter;
using Key = Philox4x32::Key;

// Published known-answer vectors for Philox-4x32-10.
TEST(Philox, KnownAnswers)
{
    EXPECT_EQ(Philox4x32::generate(Ctr{0, 0, 0, 0}, Key{0, 0}),
              (Ctr{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(Philox4x32::generate(Ctr{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                                   Key{0xffffffff, 0xffffffff}),
              (Ctr{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(Philox4x32::generate(Ctr{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                   Key{0xa4093822, 0x299f31d0}),
              (Ctr{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, CompileTimeEvaluable)
{
    constexpr auto r = Philox4x32::generate(Ctr{0, 0, 0, 0}, Key{0, 0});
    static_assert(r[0] == 0x6627e8d5);
    SUCCEED();
}

TEST(Philox, UniformsStayInsideTheOpenInterval)
{
    EXPECT_GT(open_unit(0, 0), 0.0);
    EXPECT_LT(open_unit(0xffffffff, 0xffffffff), 1.0);
}

TEST(Philox, NormalMomentsAreStandard)
{
    const Key key = philox_key(12345);
    const int n = 200000;
    double s1 = 0.0;
    double s2 = 0.0;
    double s4 = 0.0;
    for (int i = 0; i < n / 2; ++i) {
        const auto [a, b] = normal_pair(Ctr{static_cast<std::uint32_t>(i), 0, 0, 0}, key);
        for (double z : {a, b}) {
            s1 += z;
            s2 += z * z;
            s4 += z * z * z * z;
        }
    }
    // Standard errors: 1/sqrt(n), sqrt(2/n), sqrt(96/n); allow 5 of each.
    EXPECT_NEAR(s1 / n, 0.0, 5.0 / std::sqrt(n));
    EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(s4 / n, 3.0, 5.0 * std::sqrt(96.0 / n));
}

TEST(Philox, KeysSeparateStreams)
{
    const auto a = normal_pair(Ctr{1, 2, 3, 4}, philox_key(1));
    const auto b = normal_pair(Ctr{1, 2, 3, 4}, philox_key(2));
    EXPECT_NE(a.first, b.first);
    EXPECT_EQ(philox_key(0x0000000100000002ULL), (Key{2, 1}));
}

} // namespace
} // namespace dyadic
