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

#include "dyadic/lattice.hpp"
#include "dyadic/stochastic.hpp"

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace dyadic {

/// Euler-Maruyama paths of the linear system reached by the Girsanov
/// transform: dX_j = c_j X_parent dB_j - sum_{k in O_j} c_k X_k dB_k
/// - kappa_j X_j dt, driven by the same NoiseRecord machinery.
PathEnsemble simulate_linear(std::span<const double> x0, const ShellModel& model, const SdeOptions& options);

enum class MeasureChange {
    /// log dP~/dP along a nonlinear path driven by W:
    ///   -sum_j sum_i X_parent(j)(t_i) dW_j - 1/2 sum_j sum_i X_parent(j)(t_i)^2 dt
    NonlinearToLinear,
    /// log dP/dP~ along a linear path driven by B:
    ///   +sum_j sum_i X_parent(j)(t_i) dB_j - 1/2 sum_j sum_i X_parent(j)(t_i)^2 dt
    LinearToNonlinear,
};

/// Left-point (Ito) quadrature of the Girsanov log-density. The path must
/// carry a state snapshot at every step (stride 1, store_states); the
/// increments are regenerated from `noise`.
double girsanov_logweight(const StochPath& path, const ShellModel& model, const NoiseRecord& noise,
                          MeasureChange direction);

/// Generator of the closed second-moment system m' = A m + source.
struct MomentGenerator {
    struct Triplet {
        NodeId row;
        NodeId col;
        double value;
    };
    std::size_t size = 0;
    std::vector<Triplet> entries;  ///< row-major, columns ascending within a row
    std::vector<double> source;    ///< c_root^2 f^2 at the root, zero elsewhere

    void apply(std::span<const double> m, std::span<double> out) const;
    std::vector<double> column_sums() const;
    std::vector<std::vector<double>> dense() const;
};

/// A[j][j] = -2 kappa_j, A[j][parent] = c_j^2, A[j][k] = c_k^2 for k in O_j.
MomentGenerator moment_generator(const ShellModel& model);

/// Same structure from an explicit coefficient vector (used for overrides).
MomentGenerator moment_generator(const Topology& topology, std::span<const double> c, double forcing);

struct MomentVector {
    std::vector<double> m;
    double time = 0.0;
};

enum class MomentSolver { RK4, MatrixExponential };

struct MomentOptions {
    MomentSolver solver = MomentSolver::MatrixExponential;
    double dt = 1e-3;         ///< RK4 step
    bool use_source = true;
};

/// Throws InvalidArgument for negative m0 and Divergence on non-finite output.
MomentVector solve_moments(const MomentVector& m0, const MomentGenerator& generator, double t_end,
                           const MomentOptions& options = {});

void write_generator_csv(std::ostream& out, const MomentGenerator& generator);
void write_moments_csv(std::ostream& out, std::span<const MomentVector> trajectory);

/// Statistics of importance weights held in log space.
struct WeightStats {
    double mean = 0.0;            ///< mean of exp(logweight)
    double standard_error = 0.0;
    double ess = 0.0;             ///< (sum w)^2 / sum w^2
    double max_log_weight = 0.0;
};

WeightStats weight_statistics(std::span<const double> log_weights);

struct MeanEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

MeanEstimate sample_mean(std::span<const double> values);

/// Mean of values_i * exp(log_weights_i) with its standard error, reduced
/// after shifting the log-weights by their maximum.
MeanEstimate weighted_mean(std::span<const double> values, std::span<const double> log_weights);

using PathObservable = std::function<double(std::span<const double>)>;

/// Change-of-measure check: E_P[phi(X_T)] from nonlinear Euler-Maruyama
/// paths against E_P~[phi(X_T) dP/dP~] from linear paths.
struct GirsanovReport {
    MeanEstimate nonlinear;
    MeanEstimate reweighted;
    WeightStats weights;               ///< dP/dP~ over the linear ensemble
    MeanEstimate linear_unweighted;
    MeanEstimate nonlinear_reweighted;  ///< E_P[phi dP~/dP], should match linear_unweighted
    WeightStats inverse_weights;
    std::size_t n_paths = 0;

    double combined_se() const;
    double discrepancy_in_se() const;
};

GirsanovReport girsanov_check(std::span<const double> x0, const ShellModel& model, const SdeOptions& options,
                              const PathObservable& observable);

/// Monte-Carlo E[X_j(T)^2] of the linear system against solve_moments.
struct MomentOracleReport {
    std::vector<double> mc_mean;
    std::vector<double> mc_se;
    std::vector<double> ode;
    double max_z = 0.0;       ///< max_j |mc - ode| / se
    std::size_t n_paths = 0;
    bool diverged = false;
};

MomentOracleReport moment_oracle(std::span<const double> x0, const ShellModel& model, const SdeOptions& options);

} // namespace dyadic
