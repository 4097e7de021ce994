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

#include "test_support.hpp"

#include <cmath>
#include <numeric>

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

TEST(Diffusion, HandExample)
{
    // chain of two nodes, c_1 = 2^alpha = 2, f = 1, x = (2, 3)
    const ShellModel model = model_of(build_dn(1), 1.0, 1.0);
    const std::vector<double> x{2.0, 3.0};
    const auto g = diffusion_rows(x, model).dense();
    EXPECT_EQ(g, (std::vector<std::vector<double>>{{1.0, -6.0}, {0.0, 4.0}}));
}

TEST(Diffusion, ColumnsAreEnergyNeutral)
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const int dim = static_cast<int>(rng() % 3);
        const int depth = 1 + static_cast<int>(rng() % 5);
        const Topology topo = dim == 0 ? build_dn(depth) : build_tree(dim, depth);
        const double alpha = 0.25 + 0.25 * static_cast<double>(rng() % 6);
        const double f = static_cast<double>(rng() % 3);
        const ShellModel model = model_of(topo, alpha, f);
        const auto x = random_vector(model.size(), rng);
        const auto g = diffusion_rows(x, model).dense();
        const double scale = energy(x) * model.coefficients().max_c();
        for (std::size_t k = 0; k < model.size(); ++k) {
            double column = 0.0;
            for (std::size_t j = 0; j < model.size(); ++j) {
                column += x[j] * g[j][k];
            }
            // only the forced root column injects energy
            const double want = k == 0 ? model.c(0) * f * x[0] : 0.0;
            EXPECT_NEAR(column, want, 1e-12 * std::max(1.0, scale));
        }
    }
}

TEST(Diffusion, ApplyMatchesDenseRows)
{
    std::mt19937_64 rng(5);
    const ShellModel model = model_of(build_tree(1, 4), 0.5, 1.0);
    const auto x = random_vector(model.size(), rng);
    const auto dw = random_vector(model.size(), rng, 0.1);
    const auto g = diffusion_rows(x, model).dense();
    std::vector<double> out(model.size());
    apply_diffusion(x, model, dw, out);
    for (std::size_t j = 0; j < model.size(); ++j) {
        const double want = std::inner_product(g[j].begin(), g[j].end(), dw.begin(), 0.0);
        EXPECT_NEAR(out[j], want, 1e-13 * std::max(1.0, std::abs(want)));
    }
}

TEST(ItoCorrector, MatchesFiniteDifferenceOfTheDiffusion)
{
    // Stratonovich-to-Ito drift: 1/2 sum_{i,k} G_ik d_i G_jk, which must equal -kappa_j x_j.
    std::mt19937_64 rng(17);
    for (int dim : {0, 1, 2}) {
        const ShellModel model = model_of(dim == 0 ? build_dn(3) : build_tree(dim, 3), 0.75, 1.0);
        const std::size_t n = model.size();
        const auto x = random_vector(n, rng);
        const auto g = diffusion_rows(x, model).dense();
        const double h = 1e-5;
        std::vector<double> correction(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto xp = x;
            auto xm = x;
            xp[i] += h;
            xm[i] -= h;
            const auto gp = diffusion_rows(xp, model).dense();
            const auto gm = diffusion_rows(xm, model).dense();
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t k = 0; k < n; ++k) {
                    correction[j] += 0.5 * g[i][k] * (gp[j][k] - gm[j][k]) / (2.0 * h);
                }
            }
        }
        const auto kappa = ito_corrector_rates(model);
        for (std::size_t j = 0; j < n; ++j) {
            EXPECT_NEAR(-kappa[j] * x[j], correction[j], 1e-8 * std::max(1.0, std::abs(correction[j])));
        }
    }
}

TEST(ItoCorrector, RootExcludesItsOwnCoefficient)
{
    const ShellModel model = model_of(build_dn(2), 1.0, 1.0);
    const auto kappa = ito_corrector_rates(model);
    EXPECT_DOUBLE_EQ(kappa[0], 0.5 * 4.0);
    EXPECT_DOUBLE_EQ(kappa[1], 0.5 * (4.0 + 16.0));
    EXPECT_DOUBLE_EQ(kappa[2], 0.5 * 16.0);
}

TEST(Noise, SubstepsSumTheFineIncrements)
{
    const NoiseRecord fine{42, 1e-4, 1};
    const NoiseRecord coarse{42, 1e-4, 4};
    std::vector<double> sum(7, 0.0);
    std::vector<double> tmp(7);
    for (int s = 0; s < 4; ++s) {
        fine.increments(3, 8 + s, tmp);
        for (std::size_t j = 0; j < sum.size(); ++j) {
            sum[j] += tmp[j];
        }
    }
    coarse.increments(3, 2, tmp);
    for (std::size_t j = 0; j < sum.size(); ++j) {
        EXPECT_NEAR(tmp[j], sum[j], 1e-15);
        EXPECT_EQ(fine.normal(3, 8, static_cast<NodeId>(j)) * std::sqrt(1e-4),
                  [&] { std::vector<double> v(7); fine.increments(3, 8, v); return v[j]; }());
    }
}

TEST(Sde, ReproducibleAndThreadIndependent)
{
    const ShellModel model = model_of(build_tree(1, 3), 0.5, 1.0);
    std::mt19937_64 rng(1);
    const auto x0 = random_vector(model.size(), rng, 0.5);
    SdeOptions o;
    o.t_end = 0.05;
    o.dt = 1e-3;
    o.n_paths = 16;
    o.seed = 77;
    o.stride = 10;
    o.store_states = true;
    for (auto scheme : {SdeScheme::EulerMaruyamaIto, SdeScheme::HeunStratonovich}) {
        o.threads = 1;
        const auto a = simulate_ensemble(scheme, x0, model, o);
        o.threads = 3;
        const auto b = simulate_ensemble(scheme, x0, model, o);
        ASSERT_EQ(a.paths.size(), b.paths.size());
        for (std::size_t p = 0; p < a.paths.size(); ++p) {
            EXPECT_EQ(a.paths[p].final_state, b.paths[p].final_state);
            EXPECT_EQ(a.paths[p].energies, b.paths[p].energies);
        }
        EXPECT_EQ(a.times, snapshot_times(o));
        EXPECT_NE(a.paths[0].final_state, a.paths[1].final_state);
    }
}

TEST(Sde, SnapshotTimes)
{
    SdeOptions o;
    o.t_end = 1.0;
    o.dt = 0.1;
    o.stride = 3;
    const auto t = snapshot_times(o);
    ASSERT_EQ(t.size(), 5u);
    EXPECT_NEAR(t[3], 0.9, 1e-15);
    EXPECT_NEAR(t[4], 1.0, 1e-15);
}

TEST(Sde, StabilityGuardAndOverride)
{
    const ShellModel model = model_of(build_dn(6), 1.0, 0.0);
    const std::vector<double> x0(model.size(), 0.1);
    SdeOptions o;
    o.t_end = 0.1;
    o.dt = 1e-3;  // bound is 1e-2 / 64^2
    EXPECT_EQ(error_code_of([&] { (void)euler_maruyama(x0, model, o); }), ErrorCode::InvalidArgument);
    o.enforce_stability_guard = false;
    o.t_end = 2e-3;
    EXPECT_NO_THROW((void)euler_maruyama(x0, model, o));
    CoefficientScheme viscous;
    viscous.nu = 0.1;
    const ShellModel wet(build_dn(2), viscous);
    EXPECT_EQ(error_code_of([&] { (void)euler_maruyama(std::vector<double>(3, 0.1), wet, o); }),
              ErrorCode::InvalidArgument);
}

TEST(Sde, ZeroCoefficientsFreezeTheState)
{
    const Topology t = build_tree(1, 2);
    CoefficientScheme s;
    s.forcing = 1.0;
    CoefficientTable table;
    table.c.assign(t.size(), 0.0);
    table.viscous.assign(t.size(), 0.0);
    const ShellModel model(t, s, table);
    EXPECT_TRUE(std::isinf(stability_bound(model)));
    std::vector<double> x0{0.3, -0.2, 0.1, 0.4, 0.5, -0.6, 0.7};
    SdeOptions o;
    o.t_end = 0.1;
    o.dt = 1e-2;
    o.n_paths = 3;
    for (auto scheme : {SdeScheme::EulerMaruyamaIto, SdeScheme::HeunStratonovich}) {
        const auto e = simulate_ensemble(scheme, x0, model, o);
        for (const auto& path : e.paths) {
            EXPECT_EQ(path.final_state, x0);
        }
    }
}

TEST(Sde, HeunConservesEnergyPathwiseToFirstOrder)
{
    // Unforced Stratonovich dynamics conserve |X|^2 exactly; Heun errs at O(dt).
    const ShellModel model = model_of(build_dn(3), 0.5, 0.0);
    std::mt19937_64 rng(3);
    const auto x0 = random_vector(model.size(), rng, 0.5);
    auto worst_error = [&](double dt, std::uint32_t substeps) {
        SdeOptions o;
        o.t_end = 0.5;
        o.dt = dt;
        o.substeps = substeps;
        o.n_paths = 20;
        o.seed = 9;
        const auto e = stratonovich_heun(x0, model, o);
        double worst = 0.0;
        for (const auto& path : e.paths) {
            worst += std::abs(path.energies.back() - energy(x0));
        }
        return worst / 20.0;
    };
    const double coarse = worst_error(1e-3, 2);
    const double fine = worst_error(5e-4, 1);
    EXPECT_LT(coarse, 10.0 * 1e-3 * 8.0 * energy(x0));  // c_max^2 = 8
    EXPECT_GT(coarse / fine, 1.6);
}

TEST(Sde, EulerMaruyamaMeanEnergyIsConserved)
{
    // Ito energy balance with f = 0: the drift correction cancels the trace term exactly.
    const ShellModel model = model_of(build_dn(3), 0.5, 0.0);
    const std::vector<double> x0{0.5, 0.4, 0.3, 0.2};
    SdeOptions o;
    o.t_end = 0.2;
    o.dt = 1e-3;
    o.n_paths = 4000;
    o.seed = 21;
    const auto e = euler_maruyama(x0, model, o);
    std::vector<double> final_energy;
    for (const auto& path : e.paths) {
        final_energy.push_back(path.energies.back());
    }
    const double n = static_cast<double>(final_energy.size());
    const double mean = std::accumulate(final_energy.begin(), final_energy.end(), 0.0) / n;
    double var = 0.0;
    for (double v : final_energy) {
        var += (v - mean) * (v - mean);
    }
    const double se = std::sqrt(var / (n - 1.0) / n);
    EXPECT_NEAR(mean, energy(x0), 4.0 * se + 1e-3 * energy(x0));
}

TEST(Sde, EnergyControlOnUnforcedHeun)
{
    const ShellModel model = model_of(build_dn(3), 0.5, 0.0);
    const std::vector<double> x0{0.5, 0.4, 0.3, 0.2};
    SdeOptions o;
    o.t_end = 0.2;
    o.dt = 1e-3;
    o.n_paths = 50;
    const auto e = stratonovich_heun(x0, model, o);
    const auto control = energy_control_check(e, x0, model);
    EXPECT_EQ(control.fraction, 1.0);
    EXPECT_LE(control.max_excess, control.tolerance);
}

} // namespace
} // namespace dyadic
