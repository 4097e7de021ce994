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
#include "dyadic/moments.hpp"

#include "dyadic/error.hpp"
#include "dyadic/parallel.hpp"
#include "dyadic/text.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace dyadic {

PathEnsemble simulate_linear(std::span<const double> x0, const ShellModel& model, const SdeOptions& options)
{
    return simulate_ensemble(SdeScheme::LinearIto, x0, model, options);
}

double girsanov_logweight(const StochPath& path, const ShellModel& model, const NoiseRecord& noise,
                          MeasureChange direction)
{
    require(!path.states.empty() && path.states.size() == path.steps + 1,
            "girsanov_logweight needs the full per-step state history of the path");
    const Topology& topo = model.topology();
    const std::size_t n = topo.size();
    const double dt = noise.dt();
    const double sign = direction == MeasureChange::NonlinearToLinear ? -1.0 : 1.0;

    std::vector<double> dw(n);
    std::vector<double> drift_terms;
    std::vector<double> quadratic_terms;
    drift_terms.reserve(path.steps);
    quadratic_terms.reserve(path.steps);
    for (std::size_t step = 0; step < path.steps; ++step) {
        const auto& x = path.states[step];
        noise.increments(path.index, step, dw);
        double linear = 0.0;
        double quadratic = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double up = j == 0 ? model.forcing() : x[topo.parent(static_cast<NodeId>(j))];
            linear += up * dw[j];
            quadratic += up * up;
        }
        drift_terms.push_back(linear);
        quadratic_terms.push_back(quadratic);
    }
    return sign * pairwise_sum(drift_terms) - 0.5 * dt * pairwise_sum(quadratic_terms);
}

void MomentGenerator::apply(std::span<const double> m, std::span<double> out) const
{
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& t : entries) {
        out[t.row] += t.value * m[t.col];
    }
}

std::vector<double> MomentGenerator::column_sums() const
{
    std::vector<double> sums(size, 0.0);
    for (const auto& t : entries) {
        sums[t.col] += t.value;
    }
    return sums;
}

std::vector<std::vector<double>> MomentGenerator::dense() const
{
    std::vector<std::vector<double>> a(size, std::vector<double>(size, 0.0));
    for (const auto& t : entries) {
        a[t.row][t.col] += t.value;
    }
    return a;
}

MomentGenerator moment_generator(const Topology& topology, std::span<const double> c, double forcing)
{
    require(c.size() == topology.size(), "coefficient vector does not match topology");
    MomentGenerator gen;
    gen.size = topology.size();
    gen.source.assign(gen.size, 0.0);
    gen.source[0] = c[0] * c[0] * forcing * forcing;
    for (std::size_t j = 0; j < gen.size; ++j) {
        const auto id = static_cast<NodeId>(j);
        double diagonal = j == 0 ? 0.0 : c[j] * c[j];
        for (NodeId k : topology.children(id)) {
            diagonal += c[k] * c[k];
        }
        if (j != 0) {
            const NodeId p = topology.parent(id);
            gen.entries.push_back({id, p, c[j] * c[j]});
        }
        gen.entries.push_back({id, id, -diagonal});
        for (NodeId k : topology.children(id)) {
            gen.entries.push_back({id, k, c[k] * c[k]});
        }
    }
    return gen;
}

MomentGenerator moment_generator(const ShellModel& model)
{
    return moment_generator(model.topology(), model.coefficients().c, model.forcing());
}

MomentVector solve_moments(const MomentVector& m0, const MomentGenerator& generator, double t_end,
                           const MomentOptions& options)
{
    const std::size_t n = generator.size;
    require(m0.m.size() == n, "moment vector does not match the generator");
    require(t_end >= 0.0, "final time must be nonnegative");
    for (double value : m0.m) {
        require(value >= 0.0, "second moments must be nonnegative");
    }
    std::vector<double> source = options.use_source ? generator.source : std::vector<double>(n, 0.0);

    MomentVector result{m0.m, m0.time + t_end};
    if (options.solver == MomentSolver::RK4) {
        require(options.dt > 0.0, "RK4 step must be positive");
        const auto steps = static_cast<std::size_t>(std::ceil(t_end / options.dt - 1e-12));
        const double h = steps == 0 ? 0.0 : t_end / static_cast<double>(steps);
        auto rhs = [&](std::span<const double> m, std::span<double> out) {
            generator.apply(m, out);
            for (std::size_t j = 0; j < n; ++j) {
                out[j] += source[j];
            }
        };
        Rk4Stepper<decltype(rhs)> rk4(n);
        for (std::size_t s = 0; s < steps; ++s) {
            rk4.step(rhs, result.m, h);
        }
    } else {
        // exp of the augmented generator [[A, s], [0, 0]] carries the constant source.
        const auto size = static_cast<Eigen::Index>(n + 1);
        Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(size, size);
        for (const auto& t : generator.entries) {
            aug(t.row, t.col) += t.value;
        }
        for (std::size_t j = 0; j < n; ++j) {
            aug(static_cast<Eigen::Index>(j), size - 1) = source[j];
        }
        const Eigen::MatrixXd propagator = (aug * t_end).exp();
        Eigen::VectorXd start(size);
        for (std::size_t j = 0; j < n; ++j) {
            start(static_cast<Eigen::Index>(j)) = m0.m[j];
        }
        start(size - 1) = 1.0;
        const Eigen::VectorXd end = propagator * start;
        for (std::size_t j = 0; j < n; ++j) {
            result.m[j] = end(static_cast<Eigen::Index>(j));
        }
    }
    for (double value : result.m) {
        if (!std::isfinite(value)) {
            fail(ErrorCode::Divergence, "moment system produced a non-finite value");
        }
    }
    return result;
}

void write_generator_csv(std::ostream& out, const MomentGenerator& generator)
{
    out << "row,col,value\n";
    for (const auto& t : generator.entries) {
        out << t.row << ',' << t.col << ',' << format_real(t.value) << '\n';
    }
}

void write_moments_csv(std::ostream& out, std::span<const MomentVector> trajectory)
{
    const std::size_t n = trajectory.empty() ? 0 : trajectory.front().m.size();
    out << "time";
    for (std::size_t j = 0; j < n; ++j) {
        out << ",m_" << j;
    }
    out << '\n';
    for (const auto& mv : trajectory) {
        out << format_real(mv.time);
        for (double value : mv.m) {
            out << ',' << format_real(value);
        }
        out << '\n';
    }
}

WeightStats weight_statistics(std::span<const double> log_weights)
{
    WeightStats stats;
    if (log_weights.empty()) {
        return stats;
    }
    const double shift = *std::max_element(log_weights.begin(), log_weights.end());
    std::vector<double> w(log_weights.size());
    std::vector<double> w2(log_weights.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = std::exp(log_weights[i] - shift);
        w2[i] = w[i] * w[i];
    }
    const double sum = pairwise_sum(w);
    const double sum2 = pairwise_sum(w2);
    const auto n = static_cast<double>(w.size());
    const double mean_shifted = sum / n;
    const double var_shifted = w.size() > 1 ? (sum2 - n * mean_shifted * mean_shifted) / (n - 1.0) : 0.0;
    const double scale = std::exp(shift);
    stats.mean = scale * mean_shifted;
    stats.standard_error = scale * std::sqrt(std::max(var_shifted, 0.0) / n);
    stats.ess = sum * sum / sum2;
    stats.max_log_weight = shift;
    return stats;
}

MeanEstimate sample_mean(std::span<const double> values)
{
    MeanEstimate est;
    if (values.empty()) {
        return est;
    }
    const auto n = static_cast<double>(values.size());
    est.mean = pairwise_sum(values) / n;
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - est.mean;
        sq[i] = d * d;
    }
    const double var = values.size() > 1 ? pairwise_sum(sq) / (n - 1.0) : 0.0;
    est.standard_error = std::sqrt(var / n);
    return est;
}

MeanEstimate weighted_mean(std::span<const double> values, std::span<const double> log_weights)
{
    require(values.size() == log_weights.size(), "one log-weight per value required");
    if (values.empty()) {
        return {};
    }
    const double shift = *std::max_element(log_weights.begin(), log_weights.end());
    std::vector<double> products(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        products[i] = values[i] * std::exp(log_weights[i] - shift);
    }
    MeanEstimate est = sample_mean(products);
    const double scale = std::exp(shift);
    est.mean *= scale;
    est.standard_error *= scale;
    return est;
}

double GirsanovReport::combined_se() const
{
    return std::hypot(nonlinear.standard_error, reweighted.standard_error);
}

double GirsanovReport::discrepancy_in_se() const
{
    const double se = combined_se();
    const double diff = std::abs(nonlinear.mean - reweighted.mean);
    return se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
}

namespace {

/// Seed of the linear ensemble, kept distinct from the nonlinear one so the
/// two estimates are independent.
std::uint64_t linear_seed(std::uint64_t seed)
{
    return seed ^ 0x9E3779B97F4A7C15ull;
}

struct GirsanovSample {
    double value = 0.0;
    double log_weight = 0.0;
    bool diverged = false;
};

} // namespace

GirsanovReport girsanov_check(std::span<const double> x0, const ShellModel& model, const SdeOptions& options,
                              const PathObservable& observable)
{
    SdeOptions path_options = options;
    path_options.stride = 1;
    path_options.store_states = true;
    path_options.threads = 1;

    auto run = [&](SdeScheme scheme, std::uint64_t seed, MeasureChange direction) {
        SdeOptions o = path_options;
        o.seed = seed;
        const NoiseRecord noise{seed, o.dt / o.substeps, o.substeps};
        return parallel_map(options.n_paths, options.threads, [&](std::size_t i) {
            const StochPath path = simulate_path(scheme, x0, model, o, i);
            GirsanovSample sample;
            sample.diverged = path.diverged;
            if (!path.diverged) {
                sample.value = observable(path.final_state);
                sample.log_weight = girsanov_logweight(path, model, noise, direction);
            }
            return sample;
        });
    };

    const auto nonlinear = run(SdeScheme::EulerMaruyamaIto, options.seed, MeasureChange::NonlinearToLinear);
    const auto linear = run(SdeScheme::LinearIto, linear_seed(options.seed), MeasureChange::LinearToNonlinear);
    for (const auto* samples : {&nonlinear, &linear}) {
        for (const auto& s : *samples) {
            if (s.diverged) {
                fail(ErrorCode::Divergence, "a path diverged during the Girsanov check");
            }
        }
    }

    auto unpack = [](const std::vector<GirsanovSample>& samples) {
        std::pair<std::vector<double>, std::vector<double>> out;
        for (const auto& s : samples) {
            out.first.push_back(s.value);
            out.second.push_back(s.log_weight);
        }
        return out;
    };
    const auto [nl_values, nl_logw] = unpack(nonlinear);
    const auto [lin_values, lin_logw] = unpack(linear);

    GirsanovReport report;
    report.n_paths = options.n_paths;
    report.nonlinear = sample_mean(nl_values);
    report.reweighted = weighted_mean(lin_values, lin_logw);
    report.weights = weight_statistics(lin_logw);
    report.linear_unweighted = sample_mean(lin_values);
    report.nonlinear_reweighted = weighted_mean(nl_values, nl_logw);
    report.inverse_weights = weight_statistics(nl_logw);
    return report;
}

MomentOracleReport moment_oracle(std::span<const double> x0, const ShellModel& model, const SdeOptions& options)
{
    SdeOptions o = options;
    o.stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(options.t_end / options.dt)));
    o.store_states = false;
    const PathEnsemble ensemble = simulate_linear(x0, model, o);

    const std::size_t n = model.size();
    MomentOracleReport report;
    report.n_paths = ensemble.paths.size();
    report.diverged = ensemble.any_diverged();
    std::vector<double> squares(ensemble.paths.size());
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t p = 0; p < ensemble.paths.size(); ++p) {
            const double x = ensemble.paths[p].final_state[j];
            squares[p] = x * x;
        }
        const MeanEstimate est = sample_mean(squares);
        report.mc_mean.push_back(est.mean);
        report.mc_se.push_back(est.standard_error);
    }

    MomentVector m0;
    for (double x : x0) {
        m0.m.push_back(x * x);
    }
    const double t_end = static_cast<double>(std::llround(options.t_end / options.dt)) * options.dt;
    report.ode = solve_moments(m0, moment_generator(model), t_end).m;
    for (std::size_t j = 0; j < n; ++j) {
        const double diff = std::abs(report.mc_mean[j] - report.ode[j]);
        const double z = report.mc_se[j] > 0.0 ? diff / report.mc_se[j]
                                               : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        report.max_z = std::max(report.max_z, z);
    }
    return report;
}

} // namespace dyadic
