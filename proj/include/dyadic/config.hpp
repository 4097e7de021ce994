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
#include "dyadic/stochastic.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dyadic {

enum class ExperimentKind {
    DetDecay,
    ConstantAttractor,
    SelfSimilar,
    StochEnergy,
    GirsanovCheck,
    MomentOracle,
    CorrectorSweep,
};

enum class ModelFamily { KP, DN, RCM };

enum class InitialKind {
    Random,    ///< scale * N(0,1) * 2^{-decay * alpha * g / 3}
    Constant,  ///< the model's constant solution (forced models)
    Values,    ///< explicit list
};

const char* to_string(ExperimentKind kind);
const char* to_string(ModelFamily family);
const char* to_string(InitialKind kind);

/// Largest topology the runner will allocate.
inline constexpr long double kNodeBudget = 1u << 24;

/// Fully resolved experiment description. Every field has a default, so a
/// config file only lists what differs; unknown keys are rejected.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::DetDecay;
    std::string output = "out";

    ModelFamily model = ModelFamily::KP;
    int arity = 1;
    int depth = 4;
    CoefficientScheme scheme;
    std::vector<double> deltas;  ///< RCM sibling factors

    double dt = 1e-3;
    double t_end = 1.0;
    std::size_t n_paths = 100;
    std::uint64_t seed = 1;
    std::size_t stride = 10;
    Method method = Method::RK4;
    SdeScheme sde = SdeScheme::HeunStratonovich;
    std::uint32_t substeps = 1;
    bool refine = false;           ///< stoch_energy: also run at dt/2 on the same Brownian path
    bool store_states = true;
    unsigned threads = 1;

    InitialKind initial = InitialKind::Random;
    double initial_scale = 1.0;
    double initial_decay = 0.0;
    std::vector<double> initial_values;
    double perturbation = 0.0;     ///< constant_attractor: relative kick of the start state

    double profile_a0 = 1.0;
    std::optional<double> profile_a1;
    double profile_t0 = -1.0;
    std::vector<double> profile_offsets{1.0, 2.0, 5.0};  ///< t - t0 sample points

    std::vector<int> corrector_n{2, 4, 8};
    double corrector_nu = 1.0;
    double corrector_radius = 3.0;
    int corrector_fields = 3;

    bool oracle = true;
    std::optional<double> oracle_tolerance;
};

/// Parses key=value text. Throws Error(ErrorCode::Config) on unknown or
/// malformed keys and on values outside their domain. Topology size and
/// model preconditions are checked by validate_config, not here.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Canonical key=value echo of every setting except the thread count,
/// keys sorted. parse_config(config_echo(c)) reproduces c.
std::string config_echo(const ExperimentConfig& config);

std::string_view version_string();

/// Dry-run report. Never throws for model problems; they become errors.
struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    std::vector<std::pair<std::string, std::string>> derived;

    bool ok() const { return errors.empty(); }
};

ValidationReport validate_config(const ExperimentConfig& config);
void write_report(std::ostream& out, const ValidationReport& report);

/// Topology and coefficients described by the config. Throws Config errors
/// for anything validate_config would reject.
ShellModel build_model(const ExperimentConfig& config);

/// Drift family used by the deterministic experiments.
ModelKind drift_kind(const ExperimentConfig& config);

/// Start state per the initial.* settings.
std::vector<double> initial_state(const ExperimentConfig& config, const ShellModel& model);

} // namespace dyadic
