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

#include "dyadic/error.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <vector>

namespace dyadic::testing {

/// Test-side randomness, deliberately independent of the library's Philox streams.
inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0)
{
    std::normal_distribution<double> dist(0.0, scale);
    std::vector<double> v(n);
    for (auto& x : v) {
        x = dist(rng);
    }
    return v;
}

/// Runs fn and returns the ErrorCode it threw; fails the test if nothing was thrown.
inline ErrorCode error_code_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected a dyadic::Error";
    return ErrorCode::OracleMismatch;
}

} // namespace dyadic::testing
