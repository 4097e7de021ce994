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
#include "dyadic/lattice.hpp"

#include "dyadic/error.hpp"
#include "dyadic/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

namespace dyadic {

long double tree_node_count(long double arity, int depth)
{
    long double total = 0.0L;
    long double level = 1.0L;
    for (int g = 0; g <= depth; ++g) {
        total += level;
        level *= arity;
    }
    return total;
}

Topology::Topology(int arity, int depth)
    : arity_(arity), depth_(depth)
{
    require(depth >= 1, "topology depth must be >= 1 (got " + std::to_string(depth) + ")");
    const long double count = tree_node_count(arity, depth);
    if (count > static_cast<long double>(std::numeric_limits<NodeId>::max())) {
        std::ostringstream msg;
        msg << "topology with arity " << arity << " and depth " << depth << " needs "
            << static_cast<double>(count) << " nodes, more than the node id type holds";
        fail(ErrorCode::InvalidArgument, msg.str());
    }
    const auto n = static_cast<std::size_t>(count);
    parent_.resize(n);
    generation_.resize(n);
    generation_start_.reserve(static_cast<std::size_t>(depth) + 2);

    std::size_t first = 0;
    std::size_t width = 1;
    for (int g = 0; g <= depth; ++g) {
        generation_start_.push_back(static_cast<NodeId>(first));
        for (std::size_t j = first; j < first + width; ++j) {
            generation_[j] = g;
        }
        first += width;
        width *= static_cast<std::size_t>(arity);
    }
    generation_start_.push_back(static_cast<NodeId>(n));

    parent_[0] = 0;
    for (std::size_t j = 1; j < n; ++j) {
        parent_[j] = static_cast<NodeId>((j - 1) / static_cast<std::size_t>(arity));
    }
    non_root_.resize(n - 1);
    std::iota(non_root_.begin(), non_root_.end(), NodeId{1});
}

Topology Topology::chain(int depth)
{
    return Topology(1, depth);
}

Topology Topology::tree(int dim, int depth)
{
    require(dim >= 1, "tree dimension d must be >= 1 (got " + std::to_string(dim) + ")");
    require(dim < 31, "tree dimension d too large");
    return Topology(1 << dim, depth);
}

std::span<const NodeId> Topology::children(NodeId j) const noexcept
{
    if (generation_[j] == depth_) {
        return {};
    }
    const std::size_t first = static_cast<std::size_t>(arity_) * j;
    return std::span<const NodeId>(non_root_).subspan(first, static_cast<std::size_t>(arity_));
}

std::pair<NodeId, NodeId> Topology::generation_range(int g) const
{
    require(g >= 0 && g <= depth_, "generation out of range");
    return {generation_start_[static_cast<std::size_t>(g)],
            generation_start_[static_cast<std::size_t>(g) + 1]};
}

Topology build_dn(int depth)
{
    return Topology::chain(depth);
}

Topology build_tree(int dim, int depth)
{
    return Topology::tree(dim, depth);
}

void validate_scheme(const Topology& topology, const CoefficientScheme& scheme)
{
    require(scheme.alpha > 0.0 && std::isfinite(scheme.alpha), "alpha must be positive");
    require(scheme.gamma > 0.0 && std::isfinite(scheme.gamma), "gamma must be positive");
    require(scheme.nu >= 0.0 && std::isfinite(scheme.nu), "viscosity nu must be nonnegative");
    require(std::isfinite(scheme.forcing), "forcing must be finite");
    require(scheme.log_bound > 0.0, "log_bound must be positive");

    auto check_factors = [&](const std::vector<double>& factors, const char* name) {
        if (factors.empty()) {
            return;
        }
        require(factors.size() == topology.size(),
                std::string(name) + " has " + std::to_string(factors.size()) +
                    " entries, topology has " + std::to_string(topology.size()) + " nodes");
        for (std::size_t j = 0; j < factors.size(); ++j) {
            require(factors[j] > 0.0 && std::isfinite(factors[j]),
                    std::string(name) + "[" + std::to_string(j) + "] must be positive");
            require(std::abs(std::log(factors[j])) <= scheme.log_bound,
                    std::string(name) + "[" + std::to_string(j) + "] violates |log d| <= " +
                        format_real(scheme.log_bound));
        }
    };
    check_factors(scheme.d, "d");
    check_factors(scheme.d_tilde, "d_tilde");
    require(scheme.d.empty() || scheme.d[0] == 1.0, "d at the root must equal 1");
}

double CoefficientTable::max_c() const
{
    return c.empty() ? 0.0 : *std::max_element(c.begin(), c.end());
}

CoefficientTable coefficient_table(const Topology& topology, const CoefficientScheme& scheme)
{
    validate_scheme(topology, scheme);
    const std::size_t n = topology.size();
    const bool squared = scheme.viscous == ViscousConvention::Squared ||
                         (scheme.viscous == ViscousConvention::Auto && topology.is_chain());

    CoefficientTable table;
    table.c.resize(n);
    table.c_tilde.resize(n);
    table.viscous.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double g = topology.generation(static_cast<NodeId>(j));
        const double d = scheme.d.empty() ? 1.0 : scheme.d[j];
        const double dt = scheme.d_tilde.empty() ? 1.0 : scheme.d_tilde[j];
        table.c[j] = d * std::exp2(scheme.alpha * g);
        table.c_tilde[j] = dt * std::exp2(scheme.gamma * g);
        table.viscous[j] = squared ? dt * std::exp2(2.0 * scheme.gamma * g) : table.c_tilde[j];
    }
    return table;
}

std::vector<double> rcm_assign(const Topology& topology, std::span<const double> deltas)
{
    require(deltas.size() == static_cast<std::size_t>(topology.arity()),
            "rcm_assign needs " + std::to_string(topology.arity()) + " deltas, got " +
                std::to_string(deltas.size()));
    for (double delta : deltas) {
        require(delta > 0.0 && std::isfinite(delta), "rcm deltas must be positive");
    }
    std::vector<double> d(topology.size(), 1.0);
    for (std::size_t j = 1; j < d.size(); ++j) {
        d[j] = deltas[static_cast<std::size_t>(topology.sibling_index(static_cast<NodeId>(j)))];
    }
    return d;
}

ShellModel::ShellModel(Topology topology, CoefficientScheme scheme)
    : topology_(std::move(topology)), scheme_(std::move(scheme))
{
    coefficients_ = coefficient_table(topology_, scheme_);
}

ShellModel::ShellModel(Topology topology, CoefficientScheme scheme, CoefficientTable coefficients)
    : topology_(std::move(topology)), scheme_(std::move(scheme)), coefficients_(std::move(coefficients))
{
    const std::size_t n = topology_.size();
    require(coefficients_.c.size() == n && coefficients_.viscous.size() == n,
            "coefficient override does not match topology size");
    if (coefficients_.c_tilde.size() != n) {
        coefficients_.c_tilde = coefficients_.viscous;
    }
}

ShellModel ShellModel::with_scheme(CoefficientScheme scheme) const
{
    return ShellModel(topology_, std::move(scheme));
}

const char* to_string(ViscousConvention convention)
{
    switch (convention) {
    case ViscousConvention::Auto: return "auto";
    case ViscousConvention::Linear: return "linear";
    case ViscousConvention::Squared: return "squared";
    }
    return "auto";
}

ViscousConvention parse_viscous_convention(const std::string& text)
{
    if (text == "auto") {
        return ViscousConvention::Auto;
    }
    if (text == "linear") {
        return ViscousConvention::Linear;
    }
    if (text == "squared") {
        return ViscousConvention::Squared;
    }
    fail(ErrorCode::Config, "viscous convention must be auto, linear or squared, got '" + text + "'");
}

std::string to_key_value(const Topology& topology, const CoefficientScheme& scheme)
{
    std::map<std::string, std::string> entries;
    entries["topology.arity"] = std::to_string(topology.arity());
    entries["topology.depth"] = std::to_string(topology.depth());
    entries["scheme.alpha"] = format_real(scheme.alpha);
    entries["scheme.gamma"] = format_real(scheme.gamma);
    entries["scheme.nu"] = format_real(scheme.nu);
    entries["scheme.forcing"] = format_real(scheme.forcing);
    entries["scheme.log_bound"] = format_real(scheme.log_bound);
    entries["scheme.viscous"] = to_string(scheme.viscous);
    if (!scheme.d.empty()) {
        entries["scheme.d"] = join_reals(scheme.d);
    }
    if (!scheme.d_tilde.empty()) {
        entries["scheme.d_tilde"] = join_reals(scheme.d_tilde);
    }
    std::string out;
    for (const auto& [key, value] : entries) {
        out += key + "=" + value + "\n";
    }
    return out;
}

std::pair<Topology, CoefficientScheme> from_key_value(const std::string& text)
{
    auto entries = parse_key_values(text);
    auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = entries.find(key);
        if (it == entries.end()) {
            return std::nullopt;
        }
        std::string value = it->second;
        entries.erase(it);
        return value;
    };
    auto need = [&](const std::string& key) {
        auto value = take(key);
        if (!value) {
            fail(ErrorCode::Config, "missing key '" + key + "'");
        }
        return *value;
    };

    const auto arity = parse_int(need("topology.arity"), "topology.arity");
    const auto depth = parse_int(need("topology.depth"), "topology.depth");
    CoefficientScheme scheme;
    scheme.alpha = parse_real(need("scheme.alpha"), "scheme.alpha");
    scheme.gamma = parse_real(need("scheme.gamma"), "scheme.gamma");
    scheme.nu = parse_real(need("scheme.nu"), "scheme.nu");
    scheme.forcing = parse_real(need("scheme.forcing"), "scheme.forcing");
    if (auto v = take("scheme.log_bound")) {
        scheme.log_bound = parse_real(*v, "scheme.log_bound");
    }
    if (auto v = take("scheme.viscous")) {
        scheme.viscous = parse_viscous_convention(*v);
    }
    if (auto v = take("scheme.d")) {
        scheme.d = parse_real_list(*v, "scheme.d");
    }
    if (auto v = take("scheme.d_tilde")) {
        scheme.d_tilde = parse_real_list(*v, "scheme.d_tilde");
    }
    if (!entries.empty()) {
        fail(ErrorCode::Config, "unknown key '" + entries.begin()->first + "'");
    }

    if (arity < 1 || (arity & (arity - 1)) != 0) {
        fail(ErrorCode::Config, "topology.arity must be a power of two");
    }
    if (depth < 1 || depth > 64) {
        fail(ErrorCode::Config, "topology.depth out of range");
    }
    int dim = 0;
    while ((std::int64_t{1} << dim) < arity) {
        ++dim;
    }
    Topology topology = dim == 0 ? Topology::chain(static_cast<int>(depth))
                                 : Topology::tree(dim, static_cast<int>(depth));
    validate_scheme(topology, scheme);
    return {std::move(topology), std::move(scheme)};
}

} // namespace dyadic
