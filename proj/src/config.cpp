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
#include "dyadic/config.hpp"

#include "dyadic/error.hpp"
#include "dyadic/philox.hpp"
#include "dyadic/solutions.hpp"
#include "dyadic/text.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#ifndef DYADIC_VERSION
#define DYADIC_VERSION "0.0.0-unknown"
#endif

namespace dyadic {

namespace {

template <class Enum, std::size_t N>
Enum parse_enum(const std::string& value, const std::string& key,
                const std::array<std::pair<const char*, Enum>, N>& table)
{
    for (const auto& [name, e] : table) {
        if (value == name) {
            return e;
        }
    }
    std::string allowed;
    for (const auto& entry : table) {
        allowed += allowed.empty() ? "" : "|";
        allowed += entry.first;
    }
    fail(ErrorCode::Config, key + " must be one of " + allowed + ", got '" + value + "'");
}

constexpr std::array<std::pair<const char*, ExperimentKind>, 7> kExperiments{{
    {"det_decay", ExperimentKind::DetDecay},
    {"constant_attractor", ExperimentKind::ConstantAttractor},
    {"self_similar", ExperimentKind::SelfSimilar},
    {"stoch_energy", ExperimentKind::StochEnergy},
    {"girsanov_check", ExperimentKind::GirsanovCheck},
    {"moment_oracle", ExperimentKind::MomentOracle},
    {"corrector_sweep", ExperimentKind::CorrectorSweep},
}};
constexpr std::array<std::pair<const char*, ModelFamily>, 3> kFamilies{{
    {"kp", ModelFamily::KP},
    {"dn", ModelFamily::DN},
    {"rcm", ModelFamily::RCM},
}};
constexpr std::array<std::pair<const char*, InitialKind>, 3> kInitials{{
    {"random", InitialKind::Random},
    {"constant", InitialKind::Constant},
    {"values", InitialKind::Values},
}};
constexpr std::array<std::pair<const char*, Method>, 2> kMethods{{
    {"rk4", Method::RK4},
    {"euler", Method::Euler},
}};
constexpr std::array<std::pair<const char*, SdeScheme>, 3> kSdeSchemes{{
    {"em", SdeScheme::EulerMaruyamaIto},
    {"heun", SdeScheme::HeunStratonovich},
    {"linear", SdeScheme::LinearIto},
}};
constexpr std::array<std::pair<const char*, ViscousConvention>, 3> kViscous{{
    {"auto", ViscousConvention::Auto},
    {"linear", ViscousConvention::Linear},
    {"squared", ViscousConvention::Squared},
}};

template <class Enum, std::size_t N>
const char* enum_name(Enum e, const std::array<std::pair<const char*, Enum>, N>& table)
{
    for (const auto& [name, value] : table) {
        if (value == e) {
            return name;
        }
    }
    return "?";
}

bool parse_bool(const std::string& value, const std::string& key)
{
    if (value == "true") {
        return true;
    }
    if (value == "false") {
        return false;
    }
    fail(ErrorCode::Config, key + " must be true or false, got '" + value + "'");
}

void check(bool ok, const std::string& message)
{
    if (!ok) {
        fail(ErrorCode::Config, message);
    }
}

std::string join_ints(const std::vector<int>& values)
{
    std::string out;
    for (int v : values) {
        out += out.empty() ? "" : ",";
        out += std::to_string(v);
    }
    return out;
}

bool is_stochastic(ExperimentKind kind)
{
    return kind == ExperimentKind::StochEnergy || kind == ExperimentKind::GirsanovCheck ||
           kind == ExperimentKind::MomentOracle;
}

int arity_dim(int arity)
{
    int dim = 0;
    while ((1 << dim) < arity) {
        ++dim;
    }
    return dim;
}

} // namespace

const char* to_string(ExperimentKind kind)
{
    return enum_name(kind, kExperiments);
}

const char* to_string(ModelFamily family)
{
    return enum_name(family, kFamilies);
}

const char* to_string(InitialKind kind)
{
    return enum_name(kind, kInitials);
}

ExperimentConfig parse_config(std::string_view text)
{
    auto entries = parse_key_values(text);
    ExperimentConfig c;
    using Handler = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Handler> handlers{
        {"experiment.name", [&](auto& k, auto& v) { c.experiment = parse_enum(v, k, kExperiments); }},
        {"experiment.output", [&](auto&, auto& v) { c.output = v; }},
        {"model.kind", [&](auto& k, auto& v) { c.model = parse_enum(v, k, kFamilies); }},
        {"topology.arity", [&](auto& k, auto& v) { c.arity = static_cast<int>(parse_int(v, k)); }},
        {"topology.depth", [&](auto& k, auto& v) { c.depth = static_cast<int>(parse_int(v, k)); }},
        {"scheme.alpha", [&](auto& k, auto& v) { c.scheme.alpha = parse_real(v, k); }},
        {"scheme.gamma", [&](auto& k, auto& v) { c.scheme.gamma = parse_real(v, k); }},
        {"scheme.nu", [&](auto& k, auto& v) { c.scheme.nu = parse_real(v, k); }},
        {"scheme.forcing", [&](auto& k, auto& v) { c.scheme.forcing = parse_real(v, k); }},
        {"scheme.log_bound", [&](auto& k, auto& v) { c.scheme.log_bound = parse_real(v, k); }},
        {"scheme.viscous", [&](auto& k, auto& v) { c.scheme.viscous = parse_enum(v, k, kViscous); }},
        {"scheme.d", [&](auto& k, auto& v) { c.scheme.d = parse_real_list(v, k); }},
        {"scheme.d_tilde", [&](auto& k, auto& v) { c.scheme.d_tilde = parse_real_list(v, k); }},
        {"scheme.deltas", [&](auto& k, auto& v) { c.deltas = parse_real_list(v, k); }},
        {"numerics.dt", [&](auto& k, auto& v) { c.dt = parse_real(v, k); }},
        {"numerics.t_end", [&](auto& k, auto& v) { c.t_end = parse_real(v, k); }},
        {"numerics.n_paths", [&](auto& k, auto& v) { c.n_paths = parse_uint(v, k); }},
        {"numerics.seed", [&](auto& k, auto& v) { c.seed = parse_uint(v, k); }},
        {"numerics.stride", [&](auto& k, auto& v) { c.stride = parse_uint(v, k); }},
        {"numerics.method", [&](auto& k, auto& v) { c.method = parse_enum(v, k, kMethods); }},
        {"numerics.sde", [&](auto& k, auto& v) { c.sde = parse_enum(v, k, kSdeSchemes); }},
        {"numerics.substeps", [&](auto& k, auto& v) { c.substeps = static_cast<std::uint32_t>(parse_uint(v, k)); }},
        {"numerics.refine", [&](auto& k, auto& v) { c.refine = parse_bool(v, k); }},
        {"numerics.store_states", [&](auto& k, auto& v) { c.store_states = parse_bool(v, k); }},
        {"numerics.threads", [&](auto& k, auto& v) { c.threads = static_cast<unsigned>(parse_uint(v, k)); }},
        {"initial.kind", [&](auto& k, auto& v) { c.initial = parse_enum(v, k, kInitials); }},
        {"initial.scale", [&](auto& k, auto& v) { c.initial_scale = parse_real(v, k); }},
        {"initial.decay", [&](auto& k, auto& v) { c.initial_decay = parse_real(v, k); }},
        {"initial.values", [&](auto& k, auto& v) { c.initial_values = parse_real_list(v, k); }},
        {"initial.perturbation", [&](auto& k, auto& v) { c.perturbation = parse_real(v, k); }},
        {"profile.a0", [&](auto& k, auto& v) { c.profile_a0 = parse_real(v, k); }},
        {"profile.a1", [&](auto& k, auto& v) { c.profile_a1 = parse_real(v, k); }},
        {"profile.t0", [&](auto& k, auto& v) { c.profile_t0 = parse_real(v, k); }},
        {"profile.offsets", [&](auto& k, auto& v) { c.profile_offsets = parse_real_list(v, k); }},
        {"corrector.n",
         [&](auto& k, auto& v) {
             c.corrector_n.clear();
             for (auto n : parse_int_list(v, k)) {
                 check(n >= 1 && n <= 64, k + " entries must lie in 1..64");
                 c.corrector_n.push_back(static_cast<int>(n));
             }
         }},
        {"corrector.nu", [&](auto& k, auto& v) { c.corrector_nu = parse_real(v, k); }},
        {"corrector.radius", [&](auto& k, auto& v) { c.corrector_radius = parse_real(v, k); }},
        {"corrector.fields", [&](auto& k, auto& v) { c.corrector_fields = static_cast<int>(parse_int(v, k)); }},
        {"oracle.check", [&](auto& k, auto& v) { c.oracle = parse_bool(v, k); }},
        {"oracle.tolerance", [&](auto& k, auto& v) { c.oracle_tolerance = parse_real(v, k); }},
    };
    for (const auto& [key, value] : entries) {
        auto it = handlers.find(key);
        check(it != handlers.end(), "unknown key '" + key + "'");
        it->second(key, value);
    }

    check(!c.output.empty(), "experiment.output must not be empty");
    check(c.arity >= 1 && c.arity <= 1 << 20 && (c.arity & (c.arity - 1)) == 0,
          "topology.arity must be a power of two");
    check(c.depth >= 1 && c.depth <= 64, "topology.depth must lie in 1..64");
    check(c.dt > 0.0 && std::isfinite(c.dt), "numerics.dt must be positive");
    check(c.t_end >= 0.0 && std::isfinite(c.t_end), "numerics.t_end must be nonnegative");
    check(c.n_paths >= 1, "numerics.n_paths must be at least 1");
    check(c.stride >= 1, "numerics.stride must be at least 1");
    check(c.substeps >= 1, "numerics.substeps must be at least 1");
    check(c.threads >= 1, "numerics.threads must be at least 1");
    check(std::isfinite(c.initial_scale), "initial.scale must be finite");
    check(std::isfinite(c.perturbation), "initial.perturbation must be finite");
    check(c.corrector_nu > 0.0, "corrector.nu must be positive");
    check(c.corrector_radius >= 1.0, "corrector.radius must be at least 1");
    check(c.corrector_fields >= 1, "corrector.fields must be at least 1");
    check(!c.corrector_n.empty(), "corrector.n must not be empty");
    check(!c.profile_offsets.empty(), "profile.offsets must not be empty");
    for (double offset : c.profile_offsets) {
        check(offset > 0.0, "profile.offsets must be positive");
    }
    if (c.oracle_tolerance) {
        check(*c.oracle_tolerance > 0.0, "oracle.tolerance must be positive");
    }
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        fail(ErrorCode::Config, "cannot read config file '" + path + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string config_echo(const ExperimentConfig& c)
{
    std::map<std::string, std::string> kv;
    kv["experiment.name"] = to_string(c.experiment);
    kv["experiment.output"] = c.output;
    kv["model.kind"] = to_string(c.model);
    kv["topology.arity"] = std::to_string(c.arity);
    kv["topology.depth"] = std::to_string(c.depth);
    kv["scheme.alpha"] = format_real(c.scheme.alpha);
    kv["scheme.gamma"] = format_real(c.scheme.gamma);
    kv["scheme.nu"] = format_real(c.scheme.nu);
    kv["scheme.forcing"] = format_real(c.scheme.forcing);
    kv["scheme.log_bound"] = format_real(c.scheme.log_bound);
    kv["scheme.viscous"] = enum_name(c.scheme.viscous, kViscous);
    if (!c.scheme.d.empty()) {
        kv["scheme.d"] = join_reals(c.scheme.d);
    }
    if (!c.scheme.d_tilde.empty()) {
        kv["scheme.d_tilde"] = join_reals(c.scheme.d_tilde);
    }
    if (!c.deltas.empty()) {
        kv["scheme.deltas"] = join_reals(c.deltas);
    }
    kv["numerics.dt"] = format_real(c.dt);
    kv["numerics.t_end"] = format_real(c.t_end);
    kv["numerics.n_paths"] = std::to_string(c.n_paths);
    kv["numerics.seed"] = std::to_string(c.seed);
    kv["numerics.stride"] = std::to_string(c.stride);
    kv["numerics.method"] = enum_name(c.method, kMethods);
    kv["numerics.sde"] = enum_name(c.sde, kSdeSchemes);
    kv["numerics.substeps"] = std::to_string(c.substeps);
    kv["numerics.refine"] = c.refine ? "true" : "false";
    kv["numerics.store_states"] = c.store_states ? "true" : "false";
    kv["initial.kind"] = to_string(c.initial);
    kv["initial.scale"] = format_real(c.initial_scale);
    kv["initial.decay"] = format_real(c.initial_decay);
    if (!c.initial_values.empty()) {
        kv["initial.values"] = join_reals(c.initial_values);
    }
    kv["initial.perturbation"] = format_real(c.perturbation);
    kv["profile.a0"] = format_real(c.profile_a0);
    if (c.profile_a1) {
        kv["profile.a1"] = format_real(*c.profile_a1);
    }
    kv["profile.t0"] = format_real(c.profile_t0);
    kv["profile.offsets"] = join_reals(c.profile_offsets);
    kv["corrector.n"] = join_ints(c.corrector_n);
    kv["corrector.nu"] = format_real(c.corrector_nu);
    kv["corrector.radius"] = format_real(c.corrector_radius);
    kv["corrector.fields"] = std::to_string(c.corrector_fields);
    kv["oracle.check"] = c.oracle ? "true" : "false";
    if (c.oracle_tolerance) {
        kv["oracle.tolerance"] = format_real(*c.oracle_tolerance);
    }
    std::string out;
    for (const auto& [key, value] : kv) {
        out += key + " = " + value + "\n";
    }
    return out;
}

std::string_view version_string()
{
    return DYADIC_VERSION;
}

namespace {

/// Model-level checks shared by validate_config and build_model; returns
/// the first problem found.
std::optional<std::string> model_problem(const ExperimentConfig& c)
{
    const long double nodes = tree_node_count(c.arity, c.depth);
    if (nodes > kNodeBudget) {
        std::ostringstream msg;
        msg << "topology has " << format_real(static_cast<double>(nodes)) << " nodes, over the budget of "
            << format_real(static_cast<double>(kNodeBudget));
        return msg.str();
    }
    if (c.model == ModelFamily::DN && c.arity != 1) {
        return "model.kind = dn needs topology.arity = 1";
    }
    if (c.model == ModelFamily::RCM) {
        if (c.arity < 2) {
            return "model.kind = rcm needs a tree (topology.arity >= 2)";
        }
        if (c.deltas.size() != static_cast<std::size_t>(c.arity)) {
            return "scheme.deltas must list " + std::to_string(c.arity) + " values for model.kind = rcm";
        }
        if (!c.scheme.d.empty()) {
            return "scheme.d cannot be combined with model.kind = rcm";
        }
    } else if (!c.deltas.empty()) {
        return "scheme.deltas is only meaningful for model.kind = rcm";
    }
    return std::nullopt;
}

ShellModel make_model(const ExperimentConfig& c)
{
    Topology topology = c.arity == 1 ? Topology::chain(c.depth) : Topology::tree(arity_dim(c.arity), c.depth);
    CoefficientScheme scheme = c.scheme;
    if (c.model == ModelFamily::RCM) {
        scheme.d = rcm_assign(topology, c.deltas);
    }
    validate_scheme(topology, scheme);
    return ShellModel(std::move(topology), std::move(scheme));
}

} // namespace

ShellModel build_model(const ExperimentConfig& config)
{
    if (auto problem = model_problem(config)) {
        fail(ErrorCode::Config, *problem);
    }
    try {
        return make_model(config);
    } catch (const Error& e) {
        fail(ErrorCode::Config, e.what());
    }
}

ModelKind drift_kind(const ExperimentConfig& config)
{
    return config.model == ModelFamily::DN ? ModelKind::DN : ModelKind::KP;
}

ValidationReport validate_config(const ExperimentConfig& c)
{
    ValidationReport report;
    auto derive = [&](const std::string& key, const std::string& value) { report.derived.emplace_back(key, value); };

    derive("experiment", to_string(c.experiment));
    derive("model", to_string(c.model));
    const long double nodes = tree_node_count(c.arity, c.depth);
    derive("nodes", format_real(static_cast<double>(nodes)));
    derive("node_budget", format_real(static_cast<double>(kNodeBudget)));

    // c_max from the scheme alone, so oversized topologies still get a report.
    double d_max = 1.0;
    for (double d : c.scheme.d) {
        d_max = std::max(d_max, d);
    }
    for (double d : c.deltas) {
        d_max = std::max(d_max, d);
    }
    const double c_max = d_max * std::exp2(c.scheme.alpha * c.depth);
    const double dt_bound = 1e-2 / (c_max * c_max);
    derive("c_max", format_real(c_max));
    derive("stochastic_dt_bound", format_real(dt_bound));
    derive("steps", std::to_string(std::llround(c.t_end / c.dt)));

    if (auto problem = model_problem(c)) {
        report.errors.push_back(*problem);
    } else {
        try {
            const ShellModel model = make_model(c);
            derive("c_max_exact", format_real(model.coefficients().max_c()));
        } catch (const Error& e) {
            report.errors.emplace_back(e.what());
        }
    }

    if (is_stochastic(c.experiment)) {
        derive("paths", std::to_string(c.n_paths));
        if (c.dt > dt_bound) {
            report.warnings.push_back("numerics.dt = " + format_real(c.dt) +
                                      " exceeds the stability guard 1e-2/max c^2 = " + format_real(dt_bound));
        }
        if (c.experiment != ExperimentKind::StochEnergy && c.scheme.nu != 0.0) {
            report.errors.emplace_back("the Ito and linear systems are defined for scheme.nu = 0");
        }
    }
    if (c.experiment == ExperimentKind::SelfSimilar) {
        if (c.arity != 1 || c.scheme.nu != 0.0 || c.scheme.forcing != 0.0) {
            report.errors.emplace_back("self_similar needs an inviscid unforced chain (arity 1, nu = 0, f = 0)");
        }
    }
    if (c.initial == InitialKind::Values && c.initial_values.size() != static_cast<std::size_t>(nodes)) {
        report.errors.push_back("initial.values has " + std::to_string(c.initial_values.size()) +
                                " entries for " + format_real(static_cast<double>(nodes)) + " nodes");
    }
    if (c.initial == InitialKind::Constant && c.scheme.forcing == 0.0) {
        report.warnings.emplace_back("initial.kind = constant with zero forcing starts from the zero state");
    }
    return report;
}

void write_report(std::ostream& out, const ValidationReport& report)
{
    out << (report.ok() ? "ok" : "rejected") << '\n';
    for (const auto& [key, value] : report.derived) {
        out << key << " = " << value << '\n';
    }
    for (const auto& w : report.warnings) {
        out << "warning: " << w << '\n';
    }
    for (const auto& e : report.errors) {
        out << "error: " << e << '\n';
    }
}

std::vector<double> initial_state(const ExperimentConfig& config, const ShellModel& model)
{
    const Topology& topo = model.topology();
    const std::size_t n = topo.size();
    switch (config.initial) {
    case InitialKind::Values:
        if (config.initial_values.size() != n) {
            fail(ErrorCode::Config, "initial.values must list one value per node");
        }
        return config.initial_values;
    case InitialKind::Constant:
        return constant_solution(model).x;
    case InitialKind::Random:
        break;
    }
    // A key distinct from the Brownian streams, which are keyed by the seed itself.
    const auto key = philox_key(config.seed ^ 0xD1B54A32D192ED03ull);
    std::vector<double> x(n);
    for (std::size_t j = 0; j < n; j += 2) {
        const auto [z0, z1] = normal_pair({static_cast<std::uint32_t>(j / 2), 0, 0, 0}, key);
        x[j] = z0;
        if (j + 1 < n) {
            x[j + 1] = z1;
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        const int g = topo.generation(static_cast<NodeId>(j));
        x[j] *= config.initial_scale * std::exp2(-config.initial_decay * model.scheme().alpha * g / 3.0);
    }
    return x;
}

} // namespace dyadic
