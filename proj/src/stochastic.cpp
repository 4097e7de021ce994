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
#include "dyadic/stochastic.hpp"

#include "dyadic/error.hpp"
#include "dyadic/parallel.hpp"
#include "dyadic/philox.hpp"
#include "dyadic/text.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace dyadic {

namespace {

Philox4x32::Counter noise_counter(std::uint64_t path, std::uint64_t fine_step, std::uint32_t pair)
{
    return {pair, static_cast<std::uint32_t>(fine_step), static_cast<std::uint32_t>(fine_step >> 32),
            static_cast<std::uint32_t>(path)};
}

} // namespace

double NoiseRecord::normal(std::uint64_t path, std::uint64_t fine_step, NodeId node) const noexcept
{
    const auto [z0, z1] = normal_pair(noise_counter(path, fine_step, node / 2), philox_key(seed));
    return node % 2 == 0 ? z0 : z1;
}

void NoiseRecord::increments(std::uint64_t path, std::uint64_t step, std::span<double> out) const
{
    std::fill(out.begin(), out.end(), 0.0);
    const auto key = philox_key(seed);
    const std::size_t n = out.size();
    for (std::uint32_t s = 0; s < substeps; ++s) {
        const std::uint64_t fine = step * substeps + s;
        for (std::size_t j = 0; j < n; j += 2) {
            const auto [z0, z1] = normal_pair(noise_counter(path, fine, static_cast<std::uint32_t>(j / 2)), key);
            out[j] += z0;
            if (j + 1 < n) {
                out[j + 1] += z1;
            }
        }
    }
    const double scale = std::sqrt(fine_dt);
    for (double& value : out) {
        value *= scale;
    }
}

std::vector<std::vector<double>> DiffusionRows::dense() const
{
    std::vector<std::vector<double>> g(rows.size(), std::vector<double>(rows.size(), 0.0));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        for (const auto& e : rows[j]) {
            g[j][e.column] += e.value;
        }
    }
    return g;
}

DiffusionRows diffusion_rows(std::span<const double> x, const ShellModel& model)
{
    const Topology& topo = model.topology();
    const auto& c = model.coefficients().c;
    require(x.size() == topo.size(), "state dimension does not match topology");
    DiffusionRows g;
    g.rows.resize(topo.size());
    for (std::size_t j = 0; j < topo.size(); ++j) {
        const auto id = static_cast<NodeId>(j);
        const double up = j == 0 ? model.forcing() : x[topo.parent(id)];
        auto& row = g.rows[j];
        row.push_back({id, c[j] * up});
        for (NodeId k : topo.children(id)) {
            row.push_back({k, -c[k] * x[k]});
        }
    }
    return g;
}

void apply_diffusion(std::span<const double> x, const ShellModel& model, std::span<const double> dw,
                     std::span<double> out)
{
    const Topology& topo = model.topology();
    const auto& c = model.coefficients().c;
    const std::size_t n = topo.size();
    for (std::size_t j = 0; j < n; ++j) {
        const auto id = static_cast<NodeId>(j);
        const double up = j == 0 ? model.forcing() : x[topo.parent(id)];
        double value = c[j] * up * dw[j];
        for (NodeId k : topo.children(id)) {
            value -= c[k] * x[k] * dw[k];
        }
        out[j] = value;
    }
}

std::vector<double> ito_corrector_rates(const ShellModel& model)
{
    const Topology& topo = model.topology();
    const auto& c = model.coefficients().c;
    std::vector<double> kappa(topo.size());
    for (std::size_t j = 0; j < topo.size(); ++j) {
        const auto id = static_cast<NodeId>(j);
        double rate = j == 0 ? 0.0 : c[j] * c[j];
        for (NodeId k : topo.children(id)) {
            rate += c[k] * c[k];
        }
        kappa[j] = 0.5 * rate;
    }
    return kappa;
}

void ito_drift(std::span<const double> x, const ShellModel& model, std::span<double> out)
{
    require(model.nu() == 0.0, "the stochastic model is inviscid; nu must be 0");
    drift_kp(x, model, out);
    const auto kappa = ito_corrector_rates(model);
    for (std::size_t j = 0; j < x.size(); ++j) {
        out[j] -= kappa[j] * x[j];
    }
}

std::vector<double> ito_drift(std::span<const double> x, const ShellModel& model)
{
    std::vector<double> out(x.size());
    ito_drift(x, model, out);
    return out;
}

const char* to_string(SdeScheme scheme)
{
    switch (scheme) {
    case SdeScheme::EulerMaruyamaIto: return "euler_maruyama";
    case SdeScheme::HeunStratonovich: return "stratonovich_heun";
    case SdeScheme::LinearIto: return "linear_euler_maruyama";
    }
    return "unknown";
}

double stability_bound(const ShellModel& model)
{
    const double cmax = model.coefficients().max_c();
    return cmax == 0.0 ? std::numeric_limits<double>::infinity() : 1e-2 / (cmax * cmax);
}

bool PathEnsemble::any_diverged() const
{
    return std::any_of(paths.begin(), paths.end(), [](const StochPath& p) { return p.diverged; });
}

namespace {

std::size_t step_count(const SdeOptions& options)
{
    return static_cast<std::size_t>(std::llround(options.t_end / options.dt));
}

void check_options(std::span<const double> x0, const ShellModel& model, const SdeOptions& options)
{
    require(model.nu() == 0.0, "the stochastic model is inviscid; nu must be 0");
    require(options.dt > 0.0 && std::isfinite(options.dt), "dt must be positive");
    require(options.dt <= options.t_end, "dt must not exceed the final time");
    require(options.stride >= 1, "snapshot stride must be >= 1");
    require(options.substeps >= 1, "substeps must be >= 1");
    require(options.n_paths >= 1, "at least one path is required");
    require(x0.size() == model.size(), "initial state dimension does not match topology");
    require(!is_runaway(x0, options.divergence_threshold), "initial state must be finite");
    if (options.enforce_stability_guard) {
        const double bound = stability_bound(model);
        require(options.dt <= bound, "dt = " + format_real(options.dt) +
                                         " exceeds the stability guard 1e-2/max c^2 = " + format_real(bound));
    }
}

} // namespace

std::vector<double> snapshot_times(const SdeOptions& options)
{
    const std::size_t steps = step_count(options);
    std::vector<double> times;
    for (std::size_t s = 0; s <= steps; ++s) {
        if (s % options.stride == 0 || s == steps) {
            times.push_back(static_cast<double>(s) * options.dt);
        }
    }
    return times;
}

StochPath simulate_path(SdeScheme scheme, std::span<const double> x0, const ShellModel& model,
                        const SdeOptions& options, std::size_t path_index)
{
    check_options(x0, model, options);
    const std::size_t n = model.size();
    const std::size_t steps = step_count(options);
    const double dt = options.dt;
    const NoiseRecord noise{options.seed, dt / options.substeps, options.substeps};
    const auto kappa = ito_corrector_rates(model);

    StochPath path;
    path.index = path_index;
    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> dw(n), a0(n), a1(n), g0(n), g1(n), pred(n);

    auto record = [&] {
        path.energies.push_back(energy(x));
        if (options.store_states) {
            path.states.push_back(x);
        }
    };
    record();
    path.max_energy = energy(x);

    for (std::size_t step = 0; step < steps; ++step) {
        noise.increments(path_index, step, dw);
        switch (scheme) {
        case SdeScheme::EulerMaruyamaIto:
            drift_kp(x, model, a0);
            apply_diffusion(x, model, dw, g0);
            for (std::size_t j = 0; j < n; ++j) {
                x[j] += (a0[j] - kappa[j] * x[j]) * dt + g0[j];
            }
            break;
        case SdeScheme::HeunStratonovich:
            drift_kp(x, model, a0);
            apply_diffusion(x, model, dw, g0);
            for (std::size_t j = 0; j < n; ++j) {
                pred[j] = x[j] + a0[j] * dt + g0[j];
            }
            drift_kp(pred, model, a1);
            apply_diffusion(pred, model, dw, g1);
            for (std::size_t j = 0; j < n; ++j) {
                x[j] += 0.5 * (a0[j] + a1[j]) * dt + 0.5 * (g0[j] + g1[j]);
            }
            break;
        case SdeScheme::LinearIto:
            apply_diffusion(x, model, dw, g0);
            for (std::size_t j = 0; j < n; ++j) {
                x[j] += -kappa[j] * x[j] * dt + g0[j];
            }
            break;
        }
        path.steps = step + 1;
        if (is_runaway(x, options.divergence_threshold)) {
            path.diverged = true;
            path.divergence_time = static_cast<double>(step + 1) * dt;
            break;
        }
        path.max_energy = std::max(path.max_energy, energy(x));
        if ((step + 1) % options.stride == 0 || step + 1 == steps) {
            record();
        }
    }
    path.final_state = x;
    return path;
}

PathEnsemble simulate_ensemble(SdeScheme scheme, std::span<const double> x0, const ShellModel& model,
                               const SdeOptions& options)
{
    check_options(x0, model, options);
    PathEnsemble ensemble;
    ensemble.scheme = scheme;
    ensemble.noise = NoiseRecord{options.seed, options.dt / options.substeps, options.substeps};
    ensemble.times = snapshot_times(options);
    ensemble.paths = parallel_map(options.n_paths, options.threads, [&](std::size_t i) {
        return simulate_path(scheme, x0, model, options, i);
    });
    return ensemble;
}

PathEnsemble euler_maruyama(std::span<const double> x0, const ShellModel& model, const SdeOptions& options)
{
    return simulate_ensemble(SdeScheme::EulerMaruyamaIto, x0, model, options);
}

PathEnsemble stratonovich_heun(std::span<const double> x0, const ShellModel& model, const SdeOptions& options)
{
    return simulate_ensemble(SdeScheme::HeunStratonovich, x0, model, options);
}

EnergyControl energy_control_check(const PathEnsemble& ensemble, std::span<const double> x0,
                                   const ShellModel& model, std::optional<double> tolerance)
{
    const double e0 = energy(x0);
    const double cmax = model.coefficients().max_c();
    EnergyControl result;
    result.tolerance = tolerance.value_or(10.0 * ensemble.noise.dt() * std::max(1.0, cmax * cmax) * e0);
    if (ensemble.paths.empty()) {
        return result;
    }
    std::size_t controlled = 0;
    for (const auto& path : ensemble.paths) {
        const double excess = path.diverged ? std::numeric_limits<double>::infinity() : path.max_energy - e0;
        if (excess <= result.tolerance) {
            ++controlled;
        }
        result.max_excess = std::max(result.max_excess, excess);
    }
    result.fraction = static_cast<double>(controlled) / static_cast<double>(ensemble.paths.size());
    return result;
}

void write_ensemble_csv(std::ostream& out, const PathEnsemble& ensemble, bool with_states)
{
    const std::size_t n = ensemble.paths.empty() ? 0 : ensemble.paths.front().final_state.size();
    out << "path,seed,time,energy";
    if (with_states) {
        for (std::size_t j = 0; j < n; ++j) {
            out << ",node_" << j;
        }
    }
    out << '\n';
    for (const auto& path : ensemble.paths) {
        for (std::size_t i = 0; i < path.energies.size(); ++i) {
            out << path.index << ',' << ensemble.noise.seed << ',' << format_real(ensemble.times[i]) << ','
                << format_real(path.energies[i]);
            if (with_states) {
                require(i < path.states.size(), "ensemble has no state snapshots");
                for (double value : path.states[i]) {
                    out << ',' << format_real(value);
                }
            }
            out << '\n';
        }
    }
}

} // namespace dyadic
