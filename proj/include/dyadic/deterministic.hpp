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

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace dyadic {

/// Intensities X_j on a truncated topology at a given time.
struct ShellState {
    std::vector<double> x;
    double time = 0.0;
};

enum class ModelKind { KP, DN };
enum class Method { RK4, Euler };

const char* to_string(ModelKind kind);
const char* to_string(Method method);

/// Katz-Pavlovic right-hand side
///   dX_j/dt = -nu v_j X_j + c_j X_parent^2 - X_j sum_{k in O_j} c_k X_k
/// with the root's phantom parent held at the forcing f.
void drift_kp(std::span<const double> x, const ShellModel& model, std::span<double> out);
std::vector<double> drift_kp(std::span<const double> x, const ShellModel& model);

/// Desnianskii-Novikov right-hand side on a chain, written with the chain
/// neighbours j-1 and j+1 directly. Throws unless the topology is a chain.
void drift_dn(std::span<const double> x, const ShellModel& model, std::span<double> out);
std::vector<double> drift_dn(std::span<const double> x, const ShellModel& model);

void drift(ModelKind kind, std::span<const double> x, const ShellModel& model, std::span<double> out);

/// E = sum_j X_j^2.
double energy(std::span<const double> x);

/// Any |x_j| above this value (or a non-finite entry) marks blow-up.
inline constexpr double kDivergenceThreshold = 1e12;

bool is_runaway(std::span<const double> x, double threshold = kDivergenceThreshold);

struct IntegrateOptions {
    ModelKind model = ModelKind::KP;
    double t_end = 1.0;
    double dt = 1e-3;
    Method method = Method::RK4;
    std::size_t stride = 10;      ///< snapshot every `stride` steps (plus the final step)
    bool store_states = true;     ///< false keeps energies only
    double divergence_threshold = kDivergenceThreshold;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<double> energies;
    std::vector<std::vector<double>> states;  ///< empty in energy-only mode
    double dt = 0.0;
    Method method = Method::RK4;
    std::size_t steps = 0;                    ///< steps actually taken
    bool diverged = false;
    double divergence_time = std::numeric_limits<double>::quiet_NaN();

    ShellState final_state() const;
};

/// Fixed-step integration from x0 to (approximately) t_end. On blow-up the
/// trajectory is truncated at the offending step and flagged; no exception.
Trajectory integrate(const ShellState& x0, const ShellModel& model, const IntegrateOptions& options);

struct BudgetSample {
    double time = 0.0;
    double dedt = 0.0;         ///< central difference of the energy snapshots
    double dissipation = 0.0;  ///< -2 nu sum_j v_j X_j^2
    double injection = 0.0;    ///< 2 c_root f^2 X_root

    double residual() const { return dedt - dissipation - injection; }
};

/// Energy budget at every interior snapshot of a trajectory with states.
std::vector<BudgetSample> energy_budget(const Trajectory& trajectory, const ShellModel& model);

/// State CSV: header `time,node_0,node_1,...`, one row per snapshot.
void write_states_csv(std::ostream& out, std::span<const double> times,
                      std::span<const std::vector<double>> states);

/// CSV with header `time,energy` or `time,node_0,...` (states mode).
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, bool with_states);

void write_budget_csv(std::ostream& out, std::span<const BudgetSample> budget);

/// Classical RK4 step of a generic autonomous system, used by several modules.
template <class Rhs>
class Rk4Stepper {
public:
    explicit Rk4Stepper(std::size_t n)
        : k1_(n), k2_(n), k3_(n), k4_(n), tmp_(n)
    {
    }

    void step(Rhs& rhs, std::span<double> x, double dt)
    {
        const std::size_t n = x.size();
        rhs(std::span<const double>(x), std::span<double>(k1_));
        for (std::size_t i = 0; i < n; ++i) {
            tmp_[i] = x[i] + 0.5 * dt * k1_[i];
        }
        rhs(std::span<const double>(tmp_), std::span<double>(k2_));
        for (std::size_t i = 0; i < n; ++i) {
            tmp_[i] = x[i] + 0.5 * dt * k2_[i];
        }
        rhs(std::span<const double>(tmp_), std::span<double>(k3_));
        for (std::size_t i = 0; i < n; ++i) {
            tmp_[i] = x[i] + dt * k3_[i];
        }
        rhs(std::span<const double>(tmp_), std::span<double>(k4_));
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
        }
    }

private:
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

} // namespace dyadic
