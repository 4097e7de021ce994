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
#include "dyadic/deterministic.hpp"

#include "dyadic/error.hpp"
#include "dyadic/text.hpp"

#include <cmath>
#include <ostream>

namespace dyadic {

const char* to_string(ModelKind kind)
{
    return kind == ModelKind::KP ? "kp" : "dn";
}

const char* to_string(Method method)
{
    return method == Method::RK4 ? "rk4" : "euler";
}

void drift_kp(std::span<const double> x, const ShellModel& model, std::span<double> out)
{
    const Topology& topo = model.topology();
    const auto& c = model.coefficients().c;
    const auto& v = model.coefficients().viscous;
    const double nu = model.nu();
    const std::size_t n = topo.size();
    require(x.size() == n && out.size() == n, "state dimension does not match topology");

    for (std::size_t j = 0; j < n; ++j) {
        const auto id = static_cast<NodeId>(j);
        const double up = j == 0 ? model.forcing() : x[topo.parent(id)];
        double flux = 0.0;
        for (NodeId k : topo.children(id)) {
            flux += c[k] * x[k];
        }
        out[j] = -nu * v[j] * x[j] + c[j] * up * up - x[j] * flux;
    }
}

std::vector<double> drift_kp(std::span<const double> x, const ShellModel& model)
{
    std::vector<double> out(x.size());
    drift_kp(x, model, out);
    return out;
}

void drift_dn(std::span<const double> x, const ShellModel& model, std::span<double> out)
{
    const Topology& topo = model.topology();
    require(topo.is_chain(), "drift_dn requires a chain topology");
    const auto& c = model.coefficients().c;
    const auto& v = model.coefficients().viscous;
    const double nu = model.nu();
    const std::size_t n = topo.size();
    require(x.size() == n && out.size() == n, "state dimension does not match topology");

    for (std::size_t j = 0; j < n; ++j) {
        const double prev = j == 0 ? model.forcing() : x[j - 1];
        const double next = j + 1 < n ? 0.0 + c[j + 1] * x[j + 1] : 0.0;
        out[j] = -nu * v[j] * x[j] + c[j] * prev * prev - x[j] * next;
    }
}

std::vector<double> drift_dn(std::span<const double> x, const ShellModel& model)
{
    std::vector<double> out(x.size());
    drift_dn(x, model, out);
    return out;
}

void drift(ModelKind kind, std::span<const double> x, const ShellModel& model, std::span<double> out)
{
    if (kind == ModelKind::DN) {
        drift_dn(x, model, out);
    } else {
        drift_kp(x, model, out);
    }
}

double energy(std::span<const double> x)
{
    double sum = 0.0;
    for (double value : x) {
        sum += value * value;
    }
    return sum;
}

bool is_runaway(std::span<const double> x, double threshold)
{
    for (double value : x) {
        if (!std::isfinite(value) || std::abs(value) > threshold) {
            return true;
        }
    }
    return false;
}

ShellState Trajectory::final_state() const
{
    require(!states.empty(), "trajectory holds no states");
    return {states.back(), times.back()};
}

Trajectory integrate(const ShellState& x0, const ShellModel& model, const IntegrateOptions& options)
{
    require(options.dt > 0.0 && std::isfinite(options.dt), "dt must be positive");
    require(options.dt < options.t_end, "dt must be smaller than t_end");
    require(options.stride >= 1, "snapshot stride must be >= 1");
    require(x0.x.size() == model.size(), "initial state dimension does not match topology");
    require(!is_runaway(x0.x, options.divergence_threshold), "initial state must be finite");
    if (options.model == ModelKind::DN) {
        require(model.topology().is_chain(), "the DN model needs a chain topology");
    }

    const auto steps = static_cast<std::size_t>(std::llround(options.t_end / options.dt));
    Trajectory traj;
    traj.dt = options.dt;
    traj.method = options.method;

    std::vector<double> x = x0.x;
    auto record = [&](std::size_t step) {
        traj.times.push_back(x0.time + static_cast<double>(step) * options.dt);
        traj.energies.push_back(energy(x));
        if (options.store_states) {
            traj.states.push_back(x);
        }
    };
    record(0);

    auto rhs = [&](std::span<const double> state, std::span<double> out) {
        drift(options.model, state, model, out);
    };
    Rk4Stepper<decltype(rhs)> rk4(x.size());
    std::vector<double> slope(x.size());

    for (std::size_t step = 1; step <= steps; ++step) {
        if (options.method == Method::RK4) {
            rk4.step(rhs, x, options.dt);
        } else {
            rhs(x, slope);
            for (std::size_t i = 0; i < x.size(); ++i) {
                x[i] += options.dt * slope[i];
            }
        }
        traj.steps = step;
        if (is_runaway(x, options.divergence_threshold)) {
            traj.diverged = true;
            traj.divergence_time = x0.time + static_cast<double>(step) * options.dt;
            break;
        }
        if (step % options.stride == 0 || step == steps) {
            record(step);
        }
    }
    return traj;
}

std::vector<BudgetSample> energy_budget(const Trajectory& trajectory, const ShellModel& model)
{
    require(trajectory.states.size() >= 3 && trajectory.states.size() == trajectory.times.size(),
            "energy_budget needs at least 3 snapshots with state data");
    const auto& v = model.coefficients().viscous;
    const double f = model.forcing();
    const double c0 = model.coefficients().c[0];

    std::vector<BudgetSample> budget;
    for (std::size_t i = 1; i + 1 < trajectory.states.size(); ++i) {
        const auto& x = trajectory.states[i];
        BudgetSample s;
        s.time = trajectory.times[i];
        s.dedt = (trajectory.energies[i + 1] - trajectory.energies[i - 1]) /
                 (trajectory.times[i + 1] - trajectory.times[i - 1]);
        double dissipated = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            dissipated += v[j] * x[j] * x[j];
        }
        s.dissipation = -2.0 * model.nu() * dissipated;
        s.injection = 2.0 * c0 * f * f * x[0];
        budget.push_back(s);
    }
    return budget;
}

void write_states_csv(std::ostream& out, std::span<const double> times,
                      std::span<const std::vector<double>> states)
{
    require(times.size() == states.size(), "one time per state snapshot required");
    const std::size_t n = states.empty() ? 0 : states[0].size();
    out << "time";
    for (std::size_t j = 0; j < n; ++j) {
        out << ",node_" << j;
    }
    out << '\n';
    for (std::size_t i = 0; i < times.size(); ++i) {
        out << format_real(times[i]);
        for (double value : states[i]) {
            out << ',' << format_real(value);
        }
        out << '\n';
    }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, bool with_states)
{
    if (with_states) {
        write_states_csv(out, trajectory.times, trajectory.states);
        return;
    }
    out << "time,energy\n";
    for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
        out << format_real(trajectory.times[i]) << ',' << format_real(trajectory.energies[i]) << '\n';
    }
}

void write_budget_csv(std::ostream& out, std::span<const BudgetSample> budget)
{
    out << "time,dedt,dissipation,injection,residual\n";
    for (const auto& s : budget) {
        out << format_real(s.time) << ',' << format_real(s.dedt) << ',' << format_real(s.dissipation)
            << ',' << format_real(s.injection) << ',' << format_real(s.residual()) << '\n';
    }
}

} // namespace dyadic
