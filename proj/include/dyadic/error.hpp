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

#include <stdexcept>
#include <string>

namespace dyadic {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorCode {
    InvalidArgument,  ///< violated precondition of a library operation
    Config,           ///< malformed or unknown configuration entry
    Divergence,       ///< non-finite or runaway state during integration
    Convergence,      ///< iterative solver gave up
    OracleMismatch,   ///< self-test preset disagreed with its oracle
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Config: return "config";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::Convergence: return "convergence";
    case ErrorCode::OracleMismatch: return "oracle_mismatch";
    }
    return "unknown";
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& what)
{
    throw Error(code, what);
}

inline void require(bool condition, const std::string& what)
{
    if (!condition) {
        throw Error(ErrorCode::InvalidArgument, what);
    }
}

} // namespace dyadic
