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
#include "dyadic/experiments.hpp"

#include "dyadic/deterministic.hpp"
#include "dyadic/error.hpp"
#include "dyadic/moments.hpp"
#include "dyadic/parallel.hpp"
#include "dyadic/solutions.hpp"
#include "dyadic/stochastic.hpp"
#include "dyadic/text.hpp"
#include "dyadic/transport.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>

namespace dyadic {

namespace fs = std::filesystem;

double median(std::vector<double> values)
{
    if (values.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

class Run {
public:
    Run(const ExperimentConfig& config, fs::path dir)
        : config_(config), dir_(std::move(dir))
    {
    }

    void write(const std::string& name, const std::function<void(std::ostream&)>& body)
    {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) {
            fail(ErrorCode::Config, "cannot write '" + (dir_ / name).string() + "'");
        }
        body(out);
        out.flush();
        if (!out) {
            fail(ErrorCode::Config, "failed while writing '" + (dir_ / name).string() + "'");
        }
        outcome.files.push_back(name);
    }

    void result(const std::string& key, const std::string& value) { outcome.results.emplace_back(key, value); }
    void result(const std::string& key, double value) { result(key, format_real(value)); }
    void result(const std::string& key, bool value) { result(key, std::string(value ? "true" : "false")); }
    void count(const std::string& key, std::size_t value) { result(key, std::to_string(value)); }

    void oracle(bool passed, const std::string& what)
    {
        if (!config_.oracle) {
            return;
        }
        outcome.oracle_checked = true;
        if (!passed && outcome.oracle_passed) {
            outcome.oracle_passed = false;
            outcome.oracle_message = what;
        }
    }

    double tolerance(double fallback) const { return config_.oracle_tolerance.value_or(fallback); }

    const ExperimentConfig& config() const { return config_; }
    RunOutcome outcome;

private:
    const ExperimentConfig& config_;
    fs::path dir_;
};

double max_relative_deviation(std::span<const double> energies)
{
    double worst = 0.0;
    const double e0 = energies.front();
    for (double e : energies) {
        worst = std::max(worst, std::abs(e - e0) / e0);
    }
    return worst;
}

SdeOptions sde_options(const ExperimentConfig& c)
{
    SdeOptions o;
    o.t_end = c.t_end;
    o.dt = c.dt;
    o.seed = c.seed;
    o.n_paths = c.n_paths;
    o.stride = c.stride;
    o.store_states = false;
    o.substeps = c.substeps;
    o.threads = c.threads;
    return o;
}

void det_decay(Run& run)
{
    const auto& c = run.config();
    const ShellModel model = build_model(c);
    const std::vector<double> x0 = initial_state(c, model);
    require(energy(x0) > 0.0, "initial state has zero energy");

    IntegrateOptions options;
    options.model = drift_kind(c);
    options.t_end = c.t_end;
    options.dt = c.dt;
    options.method = c.method;
    options.stride = c.stride;
    options.store_states = c.store_states;
    const Trajectory tr = integrate({x0, 0.0}, model, options);

    run.write("trajectory.csv", [&](std::ostream& out) { write_trajectory_csv(out, tr, false); });
    if (c.store_states) {
        run.write("states.csv", [&](std::ostream& out) { write_states_csv(out, tr.times, tr.states); });
    }
    if (c.store_states && tr.states.size() >= 3) {
        const auto budget = energy_budget(tr, model);
        run.write("budget.csv", [&](std::ostream& out) { write_budget_csv(out, budget); });
    }
    const double deviation = max_relative_deviation(tr.energies);
    run.count("nodes", model.size());
    run.count("steps", tr.steps);
    run.result("energy_initial", tr.energies.front());
    run.result("energy_final", tr.energies.back());
    run.result("relative_energy_change", std::abs(tr.energies.back() - tr.energies.front()) / tr.energies.front());
    run.result("max_relative_energy_deviation", deviation);
    run.result("diverged", tr.diverged);
    run.outcome.diverged = tr.diverged;
    if (model.nu() == 0.0 && model.forcing() == 0.0) {
        const double tol = run.tolerance(1e-8);
        run.oracle(deviation <= tol, "energy drift " + format_real(deviation) + " exceeds " + format_real(tol));
    }
}

bool uniform_factors(const ExperimentConfig& c)
{
    const auto is_one = [](double d) { return d == 1.0; };
    return c.model != ModelFamily::RCM && std::all_of(c.scheme.d.begin(), c.scheme.d.end(), is_one);
}

void constant_attractor(Run& run)
{
    const auto& c = run.config();
    const ShellModel model = build_model(c);
    const Topology& topo = model.topology();
    const ShellState fixed = constant_solution(model);
    const double residual = stationarity_residual(model, fixed.x, 2);

    run.write("constant.csv", [&](std::ostream& out) {
        out << "node,generation,value\n";
        for (std::size_t j = 0; j < fixed.x.size(); ++j) {
            out << j << ',' << topo.generation(static_cast<NodeId>(j)) << ',' << format_real(fixed.x[j]) << '\n';
        }
    });

    // Generation means; on uniform trees every node of a generation agrees.
    std::vector<double> level(static_cast<std::size_t>(topo.depth()) + 1);
    for (int g = 0; g <= topo.depth(); ++g) {
        const auto [first, last] = topo.generation_range(g);
        std::vector<double> values(fixed.x.begin() + first, fixed.x.begin() + last);
        level[static_cast<std::size_t>(g)] = pairwise_sum(values) / double(values.size());
    }
    const bool closed_form = model.nu() == 0.0 && uniform_factors(c) && model.forcing() != 0.0;
    const double expected = (std::log2(double(topo.arity())) + model.scheme().alpha) / 3.0;
    double ratio_error = 0.0;
    run.write("ratios.csv", [&](std::ostream& out) {
        out << "generation,value,log2_ratio\n";
        for (int g = 0; g <= topo.depth(); ++g) {
            const double ratio = g < topo.depth() ? std::log2(level[g] / level[g + 1])
                                                  : std::numeric_limits<double>::quiet_NaN();
            if (g >= 2 && g <= topo.depth() - 3) {
                ratio_error = std::max(ratio_error, std::abs(ratio - expected));
            }
            out << g << ',' << format_real(level[g]) << ',' << format_real(ratio) << '\n';
        }
    });

    // Kick the fixed point and follow the dynamics.
    ExperimentConfig kick = c;
    kick.initial = InitialKind::Random;
    kick.initial_scale = 1.0;
    kick.initial_decay = 0.0;
    const std::vector<double> z = initial_state(kick, model);
    std::vector<double> start(fixed.x.size());
    for (std::size_t j = 0; j < start.size(); ++j) {
        start[j] = fixed.x[j] * (1.0 + c.perturbation * z[j]);
    }
    IntegrateOptions options;
    options.model = drift_kind(c);
    options.t_end = c.t_end;
    options.dt = c.dt;
    options.method = c.method;
    options.stride = c.stride;
    const Trajectory tr = integrate({start, 0.0}, model, options);
    const double scale = std::sqrt(energy(fixed.x));
    std::vector<double> distances;
    for (const auto& x : tr.states) {
        std::vector<double> diff(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) {
            diff[j] = x[j] - fixed.x[j];
        }
        distances.push_back(scale > 0.0 ? std::sqrt(energy(diff)) / scale : std::sqrt(energy(diff)));
    }
    run.write("attractor.csv", [&](std::ostream& out) {
        out << "time,relative_distance,energy\n";
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            out << format_real(tr.times[i]) << ',' << format_real(distances[i]) << ','
                << format_real(tr.energies[i]) << '\n';
        }
    });

    run.count("nodes", model.size());
    run.result("stationarity_residual", residual);
    if (closed_form) {
        run.result("expected_log2_ratio", expected);
        run.result("max_log2_ratio_error", ratio_error);
    }
    // Sup-distance away from the truncation boundary, reported only: the
    // truncated inviscid leaf keeps absorbing the injected energy.
    double interior = 0.0;
    for (std::size_t j = 0; j < fixed.x.size(); ++j) {
        if (topo.generation(static_cast<NodeId>(j)) <= topo.depth() - 2) {
            interior = std::max(interior, std::abs(tr.states.back()[j] - fixed.x[j]));
        }
    }
    run.result("attractor_distance_initial", distances.front());
    run.result("attractor_distance_final", distances.back());
    run.result("attractor_interior_sup_distance", interior);
    run.result("diverged", tr.diverged);
    run.outcome.diverged = tr.diverged;

    const double tol = run.tolerance(1e-10);
    run.oracle(residual <= tol * std::max(1.0, std::abs(model.forcing())),
               "stationarity residual " + format_real(residual) + " exceeds " + format_real(tol));
    if (closed_form) {
        run.oracle(ratio_error <= 1e-6, "log2 ratio error " + format_real(ratio_error) + " exceeds 1e-6");
    }
}

void self_similar(Run& run)
{
    const auto& c = run.config();
    const ShellModel model = build_model(c);
    const SelfSimilarProfile profile = self_similar_profile(model, c.profile_a0, c.profile_a1, c.profile_t0);

    std::vector<double> times;
    std::vector<double> reversed_times;
    for (double offset : c.profile_offsets) {
        times.push_back(c.profile_t0 + offset);
        reversed_times.push_back(-(c.profile_t0 + offset));
    }
    const double residual = verify_ansatz(profile, model, times);
    const double reversed = verify_reversed_ansatz(profile, model, reversed_times);

    // A 1% change of one interior coefficient must break the ansatz.
    SelfSimilarProfile perturbed = profile;
    const std::size_t victim = std::min<std::size_t>(2, perturbed.a.size() - 2);
    perturbed.a[victim] *= 1.01;
    const double perturbed_residual = verify_ansatz(perturbed, model, times);

    run.write("profile.csv", [&](std::ostream& out) {
        out << "node,a\n";
        for (std::size_t j = 0; j < profile.a.size(); ++j) {
            out << j << ',' << format_real(profile.a[j]) << '\n';
        }
    });
    run.write("residuals.csv", [&](std::ostream& out) {
        out << "offset,residual,reversed_residual\n";
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double t[1] = {times[i]};
            const double r[1] = {reversed_times[i]};
            out << format_real(c.profile_offsets[i]) << ',' << format_real(verify_ansatz(profile, model, t)) << ','
                << format_real(verify_reversed_ansatz(profile, model, r)) << '\n';
        }
    });
    run.result("ansatz_residual", residual);
    run.result("reversed_residual", reversed);
    run.count("perturbed_node", victim);
    run.result("perturbed_residual", perturbed_residual);
    const double tol = run.tolerance(1e-10);
    run.oracle(residual <= tol && reversed <= tol, "ansatz residual " + format_real(std::max(residual, reversed)) +
                                                       " exceeds " + format_real(tol));
    run.oracle(perturbed_residual > 1e-4, "perturbed profile still satisfies the ansatz");
}

std::vector<double> relative_energy_errors(const PathEnsemble& ensemble, double e0)
{
    std::vector<double> errors;
    for (const auto& path : ensemble.paths) {
        errors.push_back(std::abs(path.energies.back() - e0) / e0);
    }
    return errors;
}

void stoch_energy(Run& run)
{
    const auto& c = run.config();
    const ShellModel model = build_model(c);
    const std::vector<double> x0 = initial_state(c, model);
    const double e0 = energy(x0);
    require(e0 > 0.0, "initial state has zero energy");

    SdeOptions options = sde_options(c);
    if (c.refine) {
        options.substeps = 2 * c.substeps;  // same fine grid as the dt/2 run below
    }
    const PathEnsemble ensemble = simulate_ensemble(c.sde, x0, model, options);
    const EnergyControl control = energy_control_check(ensemble, x0, model);
    const double med = median(relative_energy_errors(ensemble, e0));
    run.write("ensemble.csv", [&](std::ostream& out) { write_ensemble_csv(out, ensemble, false); });

    run.count("nodes", model.size());
    run.result("scheme", std::string(to_string(c.sde)));
    run.result("energy_initial", e0);
    run.result("controlled_fraction", control.fraction);
    run.result("max_energy_excess", control.max_excess);
    run.result("control_tolerance", control.tolerance);
    run.result("median_relative_energy_error", med);
    run.outcome.diverged = ensemble.any_diverged();
    run.result("diverged", run.outcome.diverged);

    if (c.refine) {
        SdeOptions half = sde_options(c);
        half.dt = c.dt / 2.0;
        half.stride = 2 * c.stride;
        const PathEnsemble fine = simulate_ensemble(c.sde, x0, model, half);
        const double fine_med = median(relative_energy_errors(fine, e0));
        const double order = std::log2(med / fine_med);
        run.write("convergence.csv", [&](std::ostream& out) {
            out << "dt,median_relative_energy_error\n";
            out << format_real(c.dt) << ',' << format_real(med) << '\n';
            out << format_real(half.dt) << ',' << format_real(fine_med) << '\n';
        });
        run.result("median_relative_energy_error_half_dt", fine_med);
        run.result("observed_order", order);
        run.outcome.diverged = run.outcome.diverged || fine.any_diverged();
        const double min_order = run.tolerance(0.9);
        run.oracle(order >= min_order, "observed order " + format_real(order) + " below " + format_real(min_order));
    }
}

void girsanov(Run& run)
{
    const auto& c = run.config();
    const ShellModel model = build_model(c);
    const std::vector<double> x0 = initial_state(c, model);
    const GirsanovReport report =
        girsanov_check(x0, model, sde_options(c), [](std::span<const double> x) { return energy(x); });

    run.write("girsanov.csv", [&](std::ostream& out) {
        out << "estimator,mean,standard_error\n";
        auto row = [&](const char* name, double mean, double se) {
            out << name << ',' << format_real(mean) << ',' << format_real(se) << '\n';
        };
        row("nonlinear", report.nonlinear.mean, report.nonlinear.standard_error);
        row("linear_reweighted", report.reweighted.mean, report.reweighted.standard_error);
        row("linear", report.linear_unweighted.mean, report.linear_unweighted.standard_error);
        row("nonlinear_reweighted", report.nonlinear_reweighted.mean, report.nonlinear_reweighted.standard_error);
        row("weight", report.weights.mean, report.weights.standard_error);
        row("inverse_weight", report.inverse_weights.mean, report.inverse_weights.standard_error);
    });
    const double weight_z = std::abs(report.weights.mean - 1.0) / report.weights.standard_error;
    run.count("paths", report.n_paths);
    run.result("nonlinear_mean", report.nonlinear.mean);
    run.result("reweighted_mean", report.reweighted.mean);
    run.result("combined_standard_error", report.combined_se());
    run.result("discrepancy_in_se", report.discrepancy_in_se());
    run.result("weight_mean", report.weights.mean);
    run.result("weight_standard_error", report.weights.standard_error);
    run.result("weight_deviation_in_se", weight_z);
    run.result("effective_sample_size", report.weights.ess);
    run.result("inverse_effective_sample_size", report.inverse_weights.ess);

    const double k = run.tolerance(3.0);
    run.oracle(report.discrepancy_in_se() <= k,
               "estimates differ by " + format_real(report.discrepancy_in_se()) + " standard errors");
    run.oracle(weight_z <= k, "mean weight is " + format_real(weight_z) + " standard errors from 1");
}

void moment_oracle_run(Run& run)
{
    const auto& c = run.config();
    const ShellModel model = build_model(c);
    const std::vector<double> x0 = initial_state(c, model);
    const MomentOracleReport report = moment_oracle(x0, model, sde_options(c));
    const MomentGenerator gen = moment_generator(model);

    MomentVector m0;
    for (double x : x0) {
        m0.m.push_back(x * x);
    }
    MomentOptions free_options;
    free_options.use_source = false;
    const MomentVector free_end = solve_moments(m0, gen, c.t_end, free_options);
    const double total0 = pairwise_sum(m0.m);
    const double conservation = std::abs(pairwise_sum(free_end.m) - total0) / total0;
    MomentOptions rk4;
    rk4.solver = MomentSolver::RK4;
    rk4.dt = std::min(1e-3, c.dt);
    const MomentVector rk4_end = solve_moments(m0, gen, c.t_end, rk4);
    const MomentVector exp_end = solve_moments(m0, gen, c.t_end);
    double solver_gap = 0.0;
    for (std::size_t j = 0; j < exp_end.m.size(); ++j) {
        solver_gap = std::max(solver_gap, std::abs(rk4_end.m[j] - exp_end.m[j]) / std::max(1.0, exp_end.m[j]));
    }

    run.write("generator.csv", [&](std::ostream& out) { write_generator_csv(out, gen); });
    run.write("moments.csv", [&](std::ostream& out) {
        out << "node,mc_mean,mc_standard_error,ode,z\n";
        for (std::size_t j = 0; j < report.ode.size(); ++j) {
            const double z = std::abs(report.mc_mean[j] - report.ode[j]) / report.mc_se[j];
            out << j << ',' << format_real(report.mc_mean[j]) << ',' << format_real(report.mc_se[j]) << ','
                << format_real(report.ode[j]) << ',' << format_real(z) << '\n';
        }
    });
    run.count("nodes", model.size());
    run.count("paths", report.n_paths);
    run.result("max_z", report.max_z);
    run.result("source_free_conservation_error", conservation);
    run.result("rk4_vs_exponential", solver_gap);
    run.result("diverged", report.diverged);
    run.outcome.diverged = report.diverged;

    const double k = run.tolerance(3.0);
    run.oracle(report.max_z <= k, "a node is " + format_real(report.max_z) + " standard errors off");
    run.oracle(conservation <= 1e-10, "source-free total moment drifted by " + format_real(conservation));
}

void corrector_sweep(Run& run)
{
    const auto& c = run.config();
    std::vector<FourierField> fields;
    for (int i = 0; i < c.corrector_fields; ++i) {
        fields.push_back(random_solenoidal_field(c.corrector_radius, c.seed, static_cast<std::uint64_t>(i)));
    }
    std::vector<SweepRow> rows;
    double nu_error = 0.0;
    double multiplier_error = 0.0;
    std::size_t dropped = 0;
    for (int n : c.corrector_n) {
        const SigmaTable sigma = shell_sigma(n, c.corrector_nu);
        const NuSigmaProbe probe = probe_nu_sigma(sigma, c.threads);
        const double nu = nu_sigma(sigma, c.threads);
        nu_error = std::max(nu_error, std::abs(nu - c.corrector_nu) / c.corrector_nu);
        for (std::size_t i = 0; i < probe.modes.size(); ++i) {
            const double closed = single_mode_multiplier(sigma, probe.modes[i]);
            const double extracted = -4.0 * std::numbers::pi * std::numbers::pi *
                                     double(probe.modes[i].norm2()) * probe.values[i];
            multiplier_error = std::max(multiplier_error, std::abs(extracted - closed) / std::abs(closed));
        }
        const RemainderFit fit = remainder_fit(sigma, fields, c.threads);
        dropped += fit.dropped;
        rows.push_back({n, nu, fit.c_hat, fit.residual});
    }
    run.write("sweep.csv", [&](std::ostream& out) { write_sweep_csv(out, rows); });
    run.write("test_field.csv", [&](std::ostream& out) { write_field_csv(out, fields.front()); });

    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        monotone = monotone && std::abs(rows[i].c_hat + 0.4) <= std::abs(rows[i - 1].c_hat + 0.4);
    }
    run.result("nu_sigma_max_relative_error", nu_error);
    run.result("multiplier_max_relative_error", multiplier_error);
    run.result("c_hat_final", rows.back().c_hat);
    run.result("residual_final", rows.back().residual);
    run.result("distance_to_limit_final", std::abs(rows.back().c_hat + 0.4));
    run.result("distance_non_increasing", monotone);
    run.count("truncation_losses", dropped);

    const double tol = run.tolerance(1e-10);
    run.oracle(nu_error <= tol, "nu_sigma off by " + format_real(nu_error));
    run.oracle(multiplier_error <= tol, "single-mode multiplier off by " + format_real(multiplier_error));
    run.oracle(monotone, "distance of c_hat to -0.4 increased along the sweep");
}

} // namespace

RunOutcome run_experiment(const ExperimentConfig& config, const fs::path& out_dir)
{
    const ValidationReport report = validate_config(config);
    if (!report.ok()) {
        fail(ErrorCode::Config, report.errors.front());
    }
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        fail(ErrorCode::Config, "cannot create output directory '" + out_dir.string() + "': " + ec.message());
    }

    Run run(config, out_dir);
    try {
        switch (config.experiment) {
        case ExperimentKind::DetDecay:
            det_decay(run);
            break;
        case ExperimentKind::ConstantAttractor:
            constant_attractor(run);
            break;
        case ExperimentKind::SelfSimilar:
            self_similar(run);
            break;
        case ExperimentKind::StochEnergy:
            stoch_energy(run);
            break;
        case ExperimentKind::GirsanovCheck:
            girsanov(run);
            break;
        case ExperimentKind::MomentOracle:
            moment_oracle_run(run);
            break;
        case ExperimentKind::CorrectorSweep:
            corrector_sweep(run);
            break;
        }
    } catch (const Error& e) {
        // Precondition failures inside a module are configuration problems.
        if (e.code() == ErrorCode::InvalidArgument) {
            fail(ErrorCode::Config, e.what());
        }
        throw;
    }

    run.write("manifest.txt", [&](std::ostream& out) {
        out << "# dyadic " << version_string() << '\n';
        out << "# seed " << config.seed << '\n';
        out << config_echo(config);
        for (const auto& [key, value] : run.outcome.results) {
            out << "# result." << key << " = " << value << '\n';
        }
        if (run.outcome.oracle_checked) {
            out << "# oracle = " << (run.outcome.oracle_passed ? "pass" : "fail: " + run.outcome.oracle_message)
                << '\n';
        }
        for (const auto& file : run.outcome.files) {
            out << "# file " << file << '\n';
        }
    });
    return run.outcome;
}

} // namespace dyadic
