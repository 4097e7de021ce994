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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dyadic {

/// Dense node identifier; the root is 0 and ids follow breadth-first order.
using NodeId = std::uint32_t;

/// A full tree of eddies truncated at a fixed generation.
///
/// Every node below the truncation depth has exactly `arity` children; a
/// chain (the DN model) is the arity-1 case. Because ids are breadth-first,
/// the children of node j are the contiguous ids arity*j+1 ... arity*j+arity,
/// and generation g occupies a contiguous id range as well.
class Topology {
public:
    /// Chain with generations 0..depth.
    static Topology chain(int depth);

    /// Full 2^dim-ary tree with generations 0..depth.
    static Topology tree(int dim, int depth);

    std::size_t size() const noexcept { return parent_.size(); }
    int arity() const noexcept { return arity_; }
    int depth() const noexcept { return depth_; }
    bool is_chain() const noexcept { return arity_ == 1; }

    static constexpr NodeId root() noexcept { return 0; }
    bool is_root(NodeId j) const noexcept { return j == 0; }
    bool is_leaf(NodeId j) const noexcept { return generation_[j] == depth_; }

    /// Parent of a non-root node.
    NodeId parent(NodeId j) const noexcept { return parent_[j]; }
    int generation(NodeId j) const noexcept { return generation_[j]; }

    /// Ordered children O_j (empty at the truncation depth).
    std::span<const NodeId> children(NodeId j) const noexcept;

    /// Position of a non-root node among its siblings (0-based).
    int sibling_index(NodeId j) const noexcept
    {
        return static_cast<int>((j - 1) % static_cast<NodeId>(arity_));
    }

    /// Half-open id range [first, last) of generation g.
    std::pair<NodeId, NodeId> generation_range(int g) const;

private:
    Topology(int arity, int depth);

    int arity_ = 1;
    int depth_ = 0;
    std::vector<NodeId> parent_;
    std::vector<int> generation_;
    std::vector<NodeId> non_root_;           // ids 1..n-1, so children are slices
    std::vector<NodeId> generation_start_;   // size depth+2
};

/// Number of nodes of a full tree of the given arity and depth, computed in
/// extended precision so callers can report sizes that do not fit NodeId.
long double tree_node_count(long double arity, int depth);

Topology build_dn(int depth);
Topology build_tree(int dim, int depth);

enum class ViscousConvention {
    Auto,     ///< Squared on chains, Linear on trees
    Linear,   ///< v_j = d~_j 2^{gamma |j|}
    Squared,  ///< v_j = d~_j 2^{2 gamma |j|}
};

/// Exponents, per-node factors, viscosity and forcing of a shell model.
/// Empty factor vectors mean "all ones".
struct CoefficientScheme {
    double alpha = 1.0;
    double gamma = 1.0;
    std::vector<double> d;
    std::vector<double> d_tilde;
    double nu = 0.0;
    double forcing = 0.0;
    double log_bound = 10.0;
    ViscousConvention viscous = ViscousConvention::Auto;
};

/// Throws InvalidArgument unless the scheme is usable on the topology:
/// positive exponents, factor vectors sized to the topology, d_root = 1,
/// |log d_j| <= log_bound, nu >= 0.
void validate_scheme(const Topology& topology, const CoefficientScheme& scheme);

/// Per-node coefficients derived from a scheme.
struct CoefficientTable {
    std::vector<double> c;        ///< d_j 2^{alpha |j|}
    std::vector<double> c_tilde;  ///< d~_j 2^{gamma |j|}
    std::vector<double> viscous;  ///< multiplier v_j of -nu v_j X_j

    double max_c() const;
};

CoefficientTable coefficient_table(const Topology& topology, const CoefficientScheme& scheme);

/// Repeated-coefficients assignment: the child at sibling position w gets
/// deltas[w]; the root gets 1.
std::vector<double> rcm_assign(const Topology& topology, std::span<const double> deltas);

/// Immutable bundle of topology, scheme and derived coefficients shared by
/// all dynamics code.
class ShellModel {
public:
    ShellModel(Topology topology, CoefficientScheme scheme);

    /// Explicit coefficient override; used to probe degenerate limits such as
    /// vanishing noise coefficients.
    ShellModel(Topology topology, CoefficientScheme scheme, CoefficientTable coefficients);

    const Topology& topology() const noexcept { return topology_; }
    const CoefficientScheme& scheme() const noexcept { return scheme_; }
    const CoefficientTable& coefficients() const noexcept { return coefficients_; }
    std::size_t size() const noexcept { return topology_.size(); }

    double c(NodeId j) const noexcept { return coefficients_.c[j]; }
    double viscous(NodeId j) const noexcept { return coefficients_.viscous[j]; }
    double nu() const noexcept { return scheme_.nu; }
    double forcing() const noexcept { return scheme_.forcing; }

    ShellModel with_scheme(CoefficientScheme scheme) const;

private:
    Topology topology_;
    CoefficientScheme scheme_;
    CoefficientTable coefficients_;
};

/// Plain-text key=value form of a topology and scheme, one entry per line,
/// keys sorted. Keys: topology.arity, topology.depth, scheme.alpha,
/// scheme.gamma, scheme.nu, scheme.forcing, scheme.log_bound,
/// scheme.viscous, and (when non-empty) scheme.d, scheme.d_tilde as
/// comma-separated lists.
std::string to_key_value(const Topology& topology, const CoefficientScheme& scheme);

/// Inverse of to_key_value. Unknown keys are rejected with ErrorCode::Config.
std::pair<Topology, CoefficientScheme> from_key_value(const std::string& text);

const char* to_string(ViscousConvention convention);
ViscousConvention parse_viscous_convention(const std::string& text);

} // namespace dyadic
