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

#include "dyadic/deterministic.hpp"
#include "dyadic/lattice.hpp"

#include <optional>
#include <span>
#include <vector>

namespace dyadic {

struct ConstantSolutionOptions {
    double tolerance = 1e-12;        ///< target max |F| over the solved equations
    int max_fixed_point = 2000;
    double damping = 0.5;            ///< relaxation weight of the fixed-point sweep
    int max_newton = 100;
};

/// Stationary state of the forced model.
///
/// Viscous models are solved as the truncated system itself (drift = 0 at
/// every node). Inviscid truncations have no stationary state because the
/// leaves cannot pass energy on, so leaves are closed with a self-similar
/// tail: their missing children are replaced by `arity` virtual children of
/// coefficient c_leaf 2^alpha carrying X_leaf^2 / X_parent. On uniform trees
/// this reproduces the infinite system's constant solution exactly, which is
/// X_j = f lambda^{|j|+1} with lambda = (arity 2^alpha)^{-1/3}.
///
/// Throws ErrorCode::Convergence carrying the last residual on failure.
ShellState constant_solution(const ShellModel& model, const ConstantSolutionOptions& options = {});

/// max_j |drift_kp(x)_j| over nodes whose generation is at most
/// depth - exempt_generations.
double stationarity_residual(const ShellModel& model, std::span<const double> x, int exempt_generations);

/// Coefficients of the self-similar ansatz X_j(t) = a_j / (t - t0).
struct SelfSimilarProfile {
    std::vector<double> a;
    double t0 = -1.0;

    /// X(t) = a / (t - t0).
    std::vector<double> state(double t) const;
    /// dX/dt = -a / (t - t0)^2.
    std::vector<double> derivative(double t) const;
    /// Time-reversed solution Y(t) = -X(-t); blows up as t -> -t0.
    std::vector<double> reversed_state(double t) const;
    std::vector<double> reversed_derivative(double t) const;
};

/// Builds a_0..a_depth on an inviscid, unforced chain from
///   -a_j = c_j a_{j-1}^2 - c_{j+1} a_j a_{j+1},   a_{-1} = 0,
/// i.e. a_{j+1} = (a_j + c_j a_{j-1}^2) / (c_{j+1} a_j). The root equation
/// forces a_1 = 1 / c_1; a caller-supplied a1 must agree with it.
/// Throws InvalidArgument for a0 = 0 and names the generation at which a
/// zero coefficient would divide.
SelfSimilarProfile self_similar_profile(const ShellModel& model, double a0,
                                        std::optional<double> a1 = std::nullopt, double t0 = -1.0);

/// Largest relative ansatz residual |dX/dt - drift_dn(X)| / max(1, |dX/dt|)
/// over the sampled times. The leaf is excluded: the truncated leaf has no
/// child term, so the ansatz cannot hold there.
double verify_ansatz(const SelfSimilarProfile& profile, const ShellModel& model,
                     std::span<const double> times);

/// Same measure for the time-reversed solution Y(t) = -X(-t).
double verify_reversed_ansatz(const SelfSimilarProfile& profile, const ShellModel& model,
                              std::span<const double> times);

} // namespace dyadic
