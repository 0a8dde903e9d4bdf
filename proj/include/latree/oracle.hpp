#pragma once

#include <vector>

#include "latree/params.hpp"
#include "latree/tree.hpp"

namespace latree {
namespace oracle {

// Naive full joint over {0,1}^V; deliberately shares no marginalization code
// with the primary path.
struct FullJoint {
    TreeTopology tree;
    std::vector<double> table; // index bit v <-> node id v
};

FullJoint joint_by_enumeration(const ThetaParams& theta);

// marginal over the leaves by direct summation
ProbabilityTable marginalize_leaves(const FullJoint& j);

// central moment E Π_{v∈S} (Y_v - λ_v) over arbitrary node sets
double central_moment(const FullJoint& j, const std::vector<NodeId>& s);

// X_A ⊥ X_B via the square-free moment criterion μ_IJ = μ_I μ_J
bool check_independence(const FullJoint& j, const std::vector<NodeId>& a,
                        const std::vector<NodeId>& b, double tol = 1e-12);

// X_A ⊥ X_B | H_h via the moment identities
//   μ_IJ = μ_I μ_J + λ_h(1-λ_h) η_{h,I} η_{h,J}
//   η_{h,IJ} = μ_I η_{h,J} + η_{h,I} μ_J + (1-2λ_h) η_{h,I} η_{h,J}
bool check_conditional_independence(const FullJoint& j, const std::vector<NodeId>& a,
                                    const std::vector<NodeId>& b, NodeId h,
                                    double tol = 1e-12);

// the same statement checked by conditioning on H_h = 0,1 directly
bool check_conditional_independence_direct(const FullJoint& j, const std::vector<NodeId>& a,
                                           const std::vector<NodeId>& b, NodeId h,
                                           double tol = 1e-12);

// every tree separation A ⊥_T B | C holds as a conditional independence of j.
// Exhaustive for |V| <= 8; beyond that C ranges over singletons and the full
// inner-node set only.
bool global_markov_check(const TreeTopology& t, const FullJoint& j, double tol = 1e-10);

} // namespace oracle
} // namespace latree
