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

#include "test_support.hpp"

#include <cmath>

namespace dyadic {
namespace {

using testing::error_code_of;
using testing::random_vector;

ShellModel model_of(Topology t, double alpha, double f)
{
    CoefficientScheme s;
    s.alpha = alpha;
    s.forcing = f;
    return ShellModel(std::move(t), s);
}

TEST(MomentGenerator, HandExample)
{
    const ShellModel model = model_of(build_dn(1), 1.0, 1.0);
    const auto g = moment_generator(model);
    EXPECT_EQ(g.dense(), (std::vector<std::vector<double>>{{-4.0, 4.0}, {4.0, -4.0}}));
    EXPECT_EQ(g.source, (std::vector<double>{1.0, 0.0}));
}

TEST(MomentGenerator, ColumnsSumToZero)
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        const int dim = static_cast<int>(rng() % 4);
        const int depth = 1 + static_cast<int>(rng() % 4);
        const Topology topo = dim == 0 ? build_dn(depth) : build_tree(dim, depth);
        const ShellModel model = model_of(topo, 0.1 * static_cast<double>(1 + rng() % 15), 1.0);
        const auto g = moment_generator(model);
        const auto sums = g.column_sums();
        double scale = model.coefficients().max_c();
        scale *= scale;
        for (double s : sums) {
            EXPECT_LE(std::abs(s), 1e-13 * scale);
        }
        for (std::size_t i = 1; i < g.entries.size(); ++i) {
            const auto& a = g.entries[i - 1];
            const auto& b = g.entries[i];
            EXPECT_TRUE(a.row < b.row || (a.row == b.row && a.col < b.col));
        }
    }
}

TEST(MomentGenerator, ApplyMatchesDense)
{
    std::mt19937_64 rng(2);
    const ShellModel model = model_of(build_tree(1, 4), 0.5, 1.0);
    const auto g = moment_generator(model);
    const auto dense = g.dense();
    const auto m = random_vector(g.size, rng);
    std::vector<double> out(g.size);
    g.apply(m, out);
    for (std::size_t j = 0; j < g.size; ++j) {
        double want = 0.0;
        for (std::size_t k = 0; k < g.size; ++k) {
            want += dense[j][k] * m[k];
        }
        EXPECT_NEAR(out[j], want, 1e-13 * std::max(1.0, std::abs(want)));
    }
}

TEST(MomentSolver, RungeKuttaAgreesWithTheExponential)
{
    const ShellModel model = model_of(build_tree(1, 3), 0.5, 1.0);
    const auto g = moment_generator(model);
    std::vector<double> m0(g.size);
    for (std::size_t j = 0; j < g.size; ++j) {
        m0[j] = 0.1 * static_cast<double>(j + 1);
    }
    const auto expm = solve_moments({m0, 0.0}, g, 0.7);
    MomentOptions o;
    o.solver = MomentSolver::RK4;
    o.dt = 1e-3;
    const auto rk4 = solve_moments({m0, 0.0}, g, 0.7, o);
    EXPECT_DOUBLE_EQ(expm.time, 0.7);
    for (std::size_t j = 0; j < g.size; ++j) {
        EXPECT_NEAR(rk4.m[j], expm.m[j], 1e-8);
    }
}

TEST(MomentSolver, TotalEnergyGrowsAtTheInjectionRate)
{
    const ShellModel model = model_of(build_tree(2, 3), 0.5, 1.5);
    const auto g = moment_generator(model);
    const std::vector<double> m0(g.size, 0.25);
    const double t = 1.3;
    const auto m = solve_moments({m0, 0.0}, g, t);
    double total0 = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < g.size; ++j) {
        total0 += m0[j];
        total += m.m[j];
    }
    const double injected = model.c(0) * model.c(0) * 1.5 * 1.5 * t;
    EXPECT_NEAR(total, total0 + injected, 1e-10 * total);
    for (double v : m.m) {
        EXPECT_GE(v, 0.0);
    }
}

TEST(MomentSolver, Preconditions)
{
    const auto g = moment_generator(model_of(build_dn(2), 1.0, 1.0));
    EXPECT_EQ(error_code_of([&] { (void)solve_moments({{1.0, 1.0}, 0.0}, g, 1.0); }),
              ErrorCode::InvalidArgument);
    EXPECT_EQ(error_code_of([&] { (void)solve_moments({{1.0, -1.0, 1.0}, 0.0}, g, 1.0); }),
              ErrorCode::InvalidArgument);
}

/// Nonlinear Ito drift factors as G(x) mu(x), mu_j = parent value (forcing at the root).
std::vector<double> girsanov_shift(std::span<const double> x, const ShellModel& model)
{
    std::vector<double> mu(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        mu[j] = j == 0 ? model.forcing() : x[model.topology().parent(static_cast<NodeId>(j))];
    }
    return mu;
}

TEST(Girsanov, ShiftedNoiseMapsLinearPathsOntoNonlinearOnes)
{
    const ShellModel model = model_of(build_tree(1, 3), 0.5, 1.0);
    const std::size_t n = model.size();
    std::mt19937_64 rng(4);
    const auto x0 = random_vector(n, rng, 0.5);
    const auto kappa = ito_corrector_rates(model);
    const double dt = 1e-3;
    std::vector<double> xn = x0;
    std::vector<double> xl = x0;
    std::vector<double> g(n);
    double forward = 0.0;   // log dP~/dP along the nonlinear path
    double backward = 0.0;  // log dP/dP~ along the linear path
    for (int step = 0; step < 500; ++step) {
        const auto dw = random_vector(n, rng, std::sqrt(dt));
        const auto mu = girsanov_shift(xn, model);
        std::vector<double> db(n);
        for (std::size_t j = 0; j < n; ++j) {
            db[j] = dw[j] + mu[j] * dt;
            forward += -mu[j] * dw[j] - 0.5 * mu[j] * mu[j] * dt;
            backward += mu[j] * db[j] - 0.5 * mu[j] * mu[j] * dt;
        }
        const auto b = ito_drift(xn, model);
        apply_diffusion(xn, model, dw, g);
        for (std::size_t j = 0; j < n; ++j) {
            xn[j] += b[j] * dt + g[j];
        }
        apply_diffusion(xl, model, db, g);
        for (std::size_t j = 0; j < n; ++j) {
            xl[j] += -kappa[j] * xl[j] * dt + g[j];
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        EXPECT_NEAR(xn[j], xl[j], 1e-10 * std::max(1.0, std::abs(xn[j])));
    }
    EXPECT_NEAR(forward, -backward, 1e-10 * std::max(1.0, std::abs(forward)));
}

TEST(Girsanov, LogWeightMatchesAnIndependentSum)
{
    const ShellModel model = model_of(build_dn(3), 0.5, 1.0);
    const std::vector<double> x0{1.0, 0.5, 0.25, 0.125};
    SdeOptions o;
    o.t_end = 0.1;
    o.dt = 1e-3;
    o.seed = 5;
    o.store_states = true;
    const auto path = simulate_path(SdeScheme::EulerMaruyamaIto, x0, model, o, 2);
    const NoiseRecord noise{o.seed, o.dt, 1};
    for (auto direction : {MeasureChange::NonlinearToLinear, MeasureChange::LinearToNonlinear}) {
        const double sign = direction == MeasureChange::NonlinearToLinear ? -1.0 : 1.0;
        double want = 0.0;
        for (std::size_t s = 0; s < path.steps; ++s) {
            const auto mu = girsanov_shift(path.states[s], model);
            for (std::size_t j = 0; j < mu.size(); ++j) {
                const double dw = noise.normal(2, s, static_cast<NodeId>(j)) * std::sqrt(o.dt);
                want += sign * mu[j] * dw - 0.5 * mu[j] * mu[j] * o.dt;
            }
        }
        EXPECT_NEAR(girsanov_logweight(path, model, noise, direction), want, 1e-12 * std::max(1.0, std::abs(want)));
    }
    StochPath thin = path;
    thin.states.pop_back();
    EXPECT_EQ(error_code_of([&] { (void)girsanov_logweight(thin, model, noise, MeasureChange::NonlinearToLinear); }),
              ErrorCode::InvalidArgument);
}

TEST(Girsanov, ReweightedMeansAgreeOnAShortHorizon)
{
    const ShellModel model = model_of(build_dn(2), 0.5, 1.0);
    const std::vector<double> x0{1.0, 0.5, 0.25};
    SdeOptions o;
    o.t_end = 0.1;
    o.dt = 1e-3;
    o.n_paths = 2000;
    o.seed = 3;
    const auto report = girsanov_check(x0, model, o, [](std::span<const double> x) { return x[0]; });
    EXPECT_LE(report.discrepancy_in_se(), 4.0);
    EXPECT_NEAR(report.weights.mean, 1.0, 4.0 * report.weights.standard_error);
    EXPECT_GT(report.weights.ess, 0.5 * 2000);
    EXPECT_EQ(report.n_paths, 2000u);
}

TEST(MonteCarlo, LinearSecondMomentsFollowTheDiscreteRecursion)
{
    // Euler-Maruyama on the linear system propagates E[X_j^2] exactly by
    // m_j <- (1 - kappa_j dt)^2 m_j + dt (off-diagonal generator terms + source).
    const ShellModel model = model_of(build_tree(1, 2), 0.5, 1.0);
    const std::size_t n = model.size();
    const std::vector<double> x0{0.8, 0.6, 0.4, 0.3, 0.2, 0.1, 0.5};
    SdeOptions o;
    o.t_end = 0.2;
    o.dt = 1e-3;
    o.n_paths = 20000;
    o.seed = 12;
    const auto e = simulate_linear(x0, model, o);

    const auto kappa = ito_corrector_rates(model);
    const auto g = moment_generator(model);
    std::vector<double> m(n);
    for (std::size_t j = 0; j < n; ++j) {
        m[j] = x0[j] * x0[j];
    }
    std::vector<double> next(n);
    for (int step = 0; step < 200; ++step) {
        for (std::size_t j = 0; j < n; ++j) {
            next[j] = (1.0 - kappa[j] * o.dt) * (1.0 - kappa[j] * o.dt) * m[j] + o.dt * g.source[j];
        }
        for (const auto& t : g.entries) {
            if (t.row != t.col) {
                next[t.row] += o.dt * t.value * m[t.col];
            }
        }
        m = next;
    }
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> squares;
        for (const auto& path : e.paths) {
            squares.push_back(path.final_state[j] * path.final_state[j]);
        }
        const auto est = sample_mean(squares);
        EXPECT_NEAR(est.mean, m[j], 4.5 * est.standard_error) << "node " << j;
    }
}

TEST(Weights, Statistics)
{
    const std::vector<double> logw{0.0, std::log(3.0)};
    const auto s = weight_statistics(logw);
    EXPECT_NEAR(s.mean, 2.0, 1e-15);
    EXPECT_NEAR(s.ess, 1.6, 1e-15);
    EXPECT_NEAR(s.standard_error, 1.0, 1e-15);
    // far beyond exp(700) the unshifted sums would overflow
    const std::vector<double> flat(10, 300.0);
    const auto big = weight_statistics(flat);
    EXPECT_NEAR(big.mean, std::exp(300.0), 1e-14 * std::exp(300.0));
    EXPECT_EQ(big.ess, 10.0);
    EXPECT_EQ(big.standard_error, 0.0);
    const std::vector<double> values{1.0, 2.0};
    EXPECT_NEAR(weighted_mean(values, logw).mean, 3.5, 1e-15);
    EXPECT_NEAR(sample_mean(values).standard_error, 0.5, 1e-15);
}

} // namespace
} // namespace dyadic
