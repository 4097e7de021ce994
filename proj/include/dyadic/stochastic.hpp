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

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace dyadic {

/// Reproducible Brownian increments, one independent stream per node.
///
/// The underlying path is sampled on a fine grid of width fine_dt; a step
/// of an integrator spans `substeps` fine cells and its increment is the
/// sum of theirs. Runs at dt and dt/2 that share (seed, fine_dt) therefore
/// see the same Brownian path. Each fine normal is a pure function of
/// (seed, path, fine step, node).
struct NoiseRecord {
    std::uint64_t seed = 0;
    double fine_dt = 1e-3;
    std::uint32_t substeps = 1;

    double dt() const noexcept { return fine_dt * substeps; }

    /// Standard normal attached to one fine cell of one node.
    double normal(std::uint64_t path, std::uint64_t fine_step, NodeId node) const noexcept;

    /// out[j] = W_j((step+1) dt) - W_j(step dt) for every node.
    void increments(std::uint64_t path, std::uint64_t step, std::span<double> out) const;
};

/// Row j holds the coefficients of dW_k in dX_j:
///   G[j][j] = c_j X_parent(j)   (root: c_root f)
///   G[j][k] = -c_k X_k          for k in O_j.
struct DiffusionRows {
    struct Entry {
        NodeId column;
        double value;
    };
    std::vector<std::vector<Entry>> rows;

    std::vector<std::vector<double>> dense() const;
};

DiffusionRows diffusion_rows(std::span<const double> x, const ShellModel& model);

/// out = G(x) dW without materialising G.
void apply_diffusion(std::span<const double> x, const ShellModel& model, std::span<const double> dw,
                     std::span<double> out);

/// Per-node rate kappa_j of the Ito corrector -kappa_j X_j, with
/// kappa_j = (c_j^2 + sum_{k in O_j} c_k^2) / 2. The root's own noise is
/// additive (its parent is the constant forcing), so the root rate carries
/// only the children's part. Leaves have no children terms.
std::vector<double> ito_corrector_rates(const ShellModel& model);

/// Inviscid KP drift plus the Ito corrector. Throws for nu != 0.
void ito_drift(std::span<const double> x, const ShellModel& model, std::span<double> out);
std::vector<double> ito_drift(std::span<const double> x, const ShellModel& model);

enum class SdeScheme {
    EulerMaruyamaIto,   ///< nonlinear system, Ito form
    HeunStratonovich,   ///< nonlinear system, Stratonovich form, predictor-corrector
    LinearIto,          ///< Girsanov-transformed linear system, Euler-Maruyama
};

const char* to_string(SdeScheme scheme);

struct SdeOptions {
    double t_end = 1.0;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    std::size_t n_paths = 1;
    std::size_t stride = 1;           ///< snapshot stride in steps (final step always kept)
    bool store_states = false;        ///< keep full snapshots, not only energies
    std::uint32_t substeps = 1;       ///< fine Brownian cells per step
    unsigned threads = 1;
    double divergence_threshold = kDivergenceThreshold;
    bool enforce_stability_guard = true;
};

/// Largest dt accepted by the stochastic integrators: 1e-2 / max_j c_j^2.
double stability_bound(const ShellModel& model);

struct StochPath {
    std::size_t index = 0;
    std::vector<double> energies;               ///< at the ensemble snapshot times
    std::vector<std::vector<double>> states;    ///< only with store_states
    std::vector<double> final_state;
    double max_energy = 0.0;                    ///< over every step, not only snapshots
    std::size_t steps = 0;
    bool diverged = false;
    double divergence_time = std::numeric_limits<double>::quiet_NaN();
};

struct PathEnsemble {
    SdeScheme scheme = SdeScheme::EulerMaruyamaIto;
    NoiseRecord noise;
    std::vector<double> times;
    std::vector<StochPath> paths;

    bool any_diverged() const;
};

/// Snapshot times shared by every path of an ensemble.
std::vector<double> snapshot_times(const SdeOptions& options);

StochPath simulate_path(SdeScheme scheme, std::span<const double> x0, const ShellModel& model,
                        const SdeOptions& options, std::size_t path_index);

PathEnsemble simulate_ensemble(SdeScheme scheme, std::span<const double> x0, const ShellModel& model,
                               const SdeOptions& options);

PathEnsemble euler_maruyama(std::span<const double> x0, const ShellModel& model, const SdeOptions& options);
PathEnsemble stratonovich_heun(std::span<const double> x0, const ShellModel& model, const SdeOptions& options);

struct EnergyControl {
    double fraction = 1.0;    ///< paths whose energy never exceeded E(0) + tolerance
    double max_excess = 0.0;  ///< largest max_t E(t) - E(0) over paths (clamped at 0)
    double tolerance = 0.0;
};

/// Empirical check of the energy-controlled class. The default tolerance
/// 10 dt max(1, c_max^2) E(0) is a discretisation allowance; c^2 dt is the
/// dimensionless step size of the noise.
EnergyControl energy_control_check(const PathEnsemble& ensemble, std::span<const double> x0,
                                   const ShellModel& model, std::optional<double> tolerance = std::nullopt);

/// Rows `path,seed,time,energy[,node_0,...]`, paths in index order.
void write_ensemble_csv(std::ostream& out, const PathEnsemble& ensemble, bool with_states);

} // namespace dyadic
