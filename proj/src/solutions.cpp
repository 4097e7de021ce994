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
#include "dyadic/solutions.hpp"

#include "dyadic/error.hpp"
#include "dyadic/text.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace dyadic {

namespace {

/// Stationarity equations with the leaf closure described in the header.
class StationarySystem {
public:
    explicit StationarySystem(const ShellModel& model)
        : model_(model),
          topo_(model.topology()),
          c_(model.coefficients().c),
          v_(model.coefficients().viscous),
          nu_(model.nu()),
          f_(model.forcing()),
          closed_(model.nu() == 0.0)
    {
    }

    std::size_t size() const { return topo_.size(); }

    double up(std::span<const double> x, std::size_t j) const
    {
        return j == 0 ? f_ : x[topo_.parent(static_cast<NodeId>(j))];
    }

    double virtual_child_c(std::size_t j) const
    {
        return std::exp2(model_.scheme().alpha * (topo_.generation(static_cast<NodeId>(j)) + 1));
    }

    bool uses_closure(std::size_t j) const
    {
        return closed_ && topo_.is_leaf(static_cast<NodeId>(j));
    }

    void residual(std::span<const double> x, std::span<double> out) const
    {
        drift_kp(x, model_, out);
        for (std::size_t j = 0; j < size(); ++j) {
            if (uses_closure(j)) {
                const double p = up(x, j);
                out[j] = c_[j] * p * p * p - topo_.arity() * virtual_child_c(j) * x[j] * x[j] * x[j];
            }
        }
    }

    double scale(std::span<const double> x) const
    {
        double s = 1.0;
        for (std::size_t j = 0; j < size(); ++j) {
            const double p = up(x, j);
            s = std::max(s, std::abs(c_[j] * p * p));
        }
        return s;
    }

    Eigen::SparseMatrix<double> jacobian(std::span<const double> x) const
    {
        std::vector<Eigen::Triplet<double>> entries;
        entries.reserve(size() * static_cast<std::size_t>(topo_.arity() + 2));
        for (std::size_t j = 0; j < size(); ++j) {
            const auto id = static_cast<NodeId>(j);
            const auto row = static_cast<int>(j);
            const double p = up(x, j);
            if (uses_closure(j)) {
                entries.emplace_back(row, row, -3.0 * topo_.arity() * virtual_child_c(j) * x[j] * x[j]);
                entries.emplace_back(row, static_cast<int>(topo_.parent(id)), 3.0 * c_[j] * p * p);
                continue;
            }
            double flux = 0.0;
            for (NodeId k : topo_.children(id)) {
                flux += c_[k] * x[k];
                entries.emplace_back(row, static_cast<int>(k), -x[j] * c_[k]);
            }
            entries.emplace_back(row, row, -nu_ * v_[j] - flux);
            if (j != 0) {
                entries.emplace_back(row, static_cast<int>(topo_.parent(id)), 2.0 * c_[j] * p);
            }
        }
        Eigen::SparseMatrix<double> jac(static_cast<int>(size()), static_cast<int>(size()));
        jac.setFromTriplets(entries.begin(), entries.end());
        return jac;
    }

    /// One Jacobi sweep of x_j <- c_j X_parent^2 / (sum_k c_k x_k + nu v_j).
    void sweep(std::span<const double> x, std::span<double> out) const
    {
        for (std::size_t j = 0; j < size(); ++j) {
            const auto id = static_cast<NodeId>(j);
            const double p = up(x, j);
            if (uses_closure(j)) {
                out[j] = std::cbrt(c_[j] / (topo_.arity() * virtual_child_c(j))) * p;
                continue;
            }
            double denom = nu_ * v_[j];
            for (NodeId k : topo_.children(id)) {
                denom += c_[k] * x[k];
            }
            out[j] = denom > 0.0 ? c_[j] * p * p / denom : x[j];
        }
    }

private:
    const ShellModel& model_;
    const Topology& topo_;
    const std::vector<double>& c_;
    const std::vector<double>& v_;
    double nu_;
    double f_;
    bool closed_;
};

double max_abs(std::span<const double> values)
{
    double m = 0.0;
    for (double value : values) {
        m = std::max(m, std::abs(value));
    }
    return m;
}

double norm2(std::span<const double> values)
{
    double s = 0.0;
    for (double value : values) {
        s += value * value;
    }
    return std::sqrt(s);
}

/// Damped Newton with backtracking that keeps the iterate positive.
bool newton(const StationarySystem& system, std::vector<double>& x, const ConstantSolutionOptions& options,
            double& last_residual)
{
    const std::size_t n = system.size();
    std::vector<double> f(n);
    std::vector<double> trial(n);
    std::vector<double> f_trial(n);
    system.residual(x, f);

    for (int iter = 0; iter < options.max_newton; ++iter) {
        last_residual = max_abs(f);
        if (last_residual <= options.tolerance * system.scale(x)) {
            return true;
        }
        Eigen::SparseMatrix<double> jac = system.jacobian(x);
        jac.makeCompressed();
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(jac);
        if (lu.info() != Eigen::Success) {
            return false;
        }
        Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(n));
        Eigen::VectorXd delta = lu.solve(-rhs);
        if (lu.info() != Eigen::Success || !delta.allFinite()) {
            return false;
        }

        const double current = norm2(f);
        double t = 1.0;
        bool accepted = false;
        for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
            bool positive = true;
            for (std::size_t i = 0; i < n; ++i) {
                trial[i] = x[i] + t * delta[static_cast<Eigen::Index>(i)];
                positive = positive && trial[i] > 0.0;
            }
            if (!positive) {
                continue;
            }
            system.residual(trial, f_trial);
            if (norm2(f_trial) <= (1.0 - 1e-4 * t) * current) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            last_residual = max_abs(f);
            return last_residual <= options.tolerance * system.scale(x);
        }
        x.swap(trial);
        f.swap(f_trial);
    }
    last_residual = max_abs(f);
    return last_residual <= options.tolerance * system.scale(x);
}

} // namespace

ShellState constant_solution(const ShellModel& model, const ConstantSolutionOptions& options)
{
    require(options.damping > 0.0 && options.damping <= 1.0, "damping must lie in (0, 1]");
    const Topology& topo = model.topology();
    const std::size_t n = topo.size();
    const double f = std::abs(model.forcing());
    if (f == 0.0) {
        return {std::vector<double>(n, 0.0), 0.0};
    }

    // Uniform-tree closed form as the starting point.
    const double lambda = std::cbrt(1.0 / (topo.arity() * std::exp2(model.scheme().alpha)));
    std::vector<double> x(n);
    for (std::size_t j = 0; j < n; ++j) {
        x[j] = f * std::pow(lambda, topo.generation(static_cast<NodeId>(j)) + 1);
    }

    StationarySystem system(model);
    std::vector<double> residual(n);
    std::vector<double> next(n);
    system.residual(x, residual);
    double last = max_abs(residual);

    for (int iter = 0; iter < options.max_fixed_point; ++iter) {
        if (last <= options.tolerance * system.scale(x)) {
            return {x, 0.0};
        }
        system.sweep(x, next);
        for (std::size_t j = 0; j < n; ++j) {
            next[j] = (1.0 - options.damping) * x[j] + options.damping * next[j];
        }
        system.residual(next, residual);
        const double candidate = max_abs(residual);
        if (!(candidate < last)) {
            break;  // stalled; hand over to Newton
        }
        x.swap(next);
        last = candidate;
    }

    std::vector<double> start = x;
    if (newton(system, x, options, last)) {
        return {x, 0.0};
    }

    // Continuation in the viscosity from the inviscid solution.
    if (model.nu() > 0.0) {
        CoefficientScheme scheme = model.scheme();
        scheme.nu = 0.0;
        std::vector<double> y = constant_solution(model.with_scheme(scheme), options).x;
        const int ramp = 40;
        for (int s = 0; s <= ramp; ++s) {
            scheme.nu = model.nu() * std::pow(10.0, -8.0 * (ramp - s) / ramp);
            const ShellModel stage = model.with_scheme(scheme);
            StationarySystem stage_system(stage);
            if (!newton(stage_system, y, options, last)) {
                break;
            }
            if (s == ramp) {
                return {y, 0.0};
            }
        }
    }
    fail(ErrorCode::Convergence,
         "constant_solution did not converge; last residual " + format_real(last));
}

double stationarity_residual(const ShellModel& model, std::span<const double> x, int exempt_generations)
{
    const Topology& topo = model.topology();
    const std::vector<double> d = drift_kp(x, model);
    double worst = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
        if (topo.generation(static_cast<NodeId>(j)) <= topo.depth() - exempt_generations) {
            worst = std::max(worst, std::abs(d[j]));
        }
    }
    return worst;
}

std::vector<double> SelfSimilarProfile::state(double t) const
{
    std::vector<double> x(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        x[j] = a[j] / (t - t0);
    }
    return x;
}

std::vector<double> SelfSimilarProfile::derivative(double t) const
{
    std::vector<double> x(a.size());
    const double s = t - t0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        x[j] = -a[j] / (s * s);
    }
    return x;
}

std::vector<double> SelfSimilarProfile::reversed_state(double t) const
{
    std::vector<double> y = state(-t);
    for (double& value : y) {
        value = -value;
    }
    return y;
}

std::vector<double> SelfSimilarProfile::reversed_derivative(double t) const
{
    // d/dt [-X(-t)] = X'(-t)
    return derivative(-t);
}

SelfSimilarProfile self_similar_profile(const ShellModel& model, double a0, std::optional<double> a1,
                                        double t0)
{
    const Topology& topo = model.topology();
    require(topo.is_chain(), "self-similar profiles are built on DN chains");
    require(model.nu() == 0.0 && model.forcing() == 0.0,
            "the self-similar ansatz needs an inviscid, unforced model");
    require(a0 != 0.0 && std::isfinite(a0), "root coefficient a0 must be nonzero");
    require(t0 < 0.0, "singularity time t0 must be negative");

    const auto& c = model.coefficients().c;
    const std::size_t n = topo.size();
    SelfSimilarProfile profile;
    profile.t0 = t0;
    profile.a.assign(n, 0.0);
    profile.a[0] = a0;

    const double root_a1 = 1.0 / c[1];
    if (a1 && std::abs(*a1 - root_a1) > 1e-12 * std::max(1.0, std::abs(root_a1))) {
        fail(ErrorCode::InvalidArgument,
             "root equation forces a1 = 1/c_1 = " + format_real(root_a1) + ", got " + format_real(*a1));
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
        if (profile.a[j] == 0.0) {
            fail(ErrorCode::InvalidArgument,
                 "self-similar recursion divides by a_" + std::to_string(j) + " = 0 at generation " +
                     std::to_string(j));
        }
        const double prev = j == 0 ? 0.0 : profile.a[j - 1];
        const double cj = j == 0 ? 0.0 : c[j];
        profile.a[j + 1] = (profile.a[j] + cj * prev * prev) / (c[j + 1] * profile.a[j]);
    }
    return profile;
}

namespace {

double ansatz_residual(const ShellModel& model, std::span<const double> x, std::span<const double> xdot)
{
    const std::vector<double> d = drift_dn(x, model);
    double worst = 0.0;
    for (std::size_t j = 0; j + 1 < d.size(); ++j) {
        worst = std::max(worst, std::abs(xdot[j] - d[j]) / std::max(1.0, std::abs(xdot[j])));
    }
    return worst;
}

} // namespace

double verify_ansatz(const SelfSimilarProfile& profile, const ShellModel& model, std::span<const double> times)
{
    require(profile.a.size() == model.size(), "profile size does not match the model");
    double worst = 0.0;
    for (double t : times) {
        require(t != profile.t0, "sample time coincides with the singularity t0");
        worst = std::max(worst, ansatz_residual(model, profile.state(t), profile.derivative(t)));
    }
    return worst;
}

double verify_reversed_ansatz(const SelfSimilarProfile& profile, const ShellModel& model,
                              std::span<const double> times)
{
    require(profile.a.size() == model.size(), "profile size does not match the model");
    double worst = 0.0;
    for (double t : times) {
        require(t != -profile.t0, "sample time coincides with the blow-up time -t0");
        worst = std::max(worst,
                         ansatz_residual(model, profile.reversed_state(t), profile.reversed_derivative(t)));
    }
    return worst;
}

} // namespace dyadic
