#pragma once

#include <string>
#include <vector>

#include "latree/coords.hpp"
#include "latree/tree.hpp"

namespace latree {

// Conditional-probability chart of a rooted tree: P(Y_r = 1) plus, per
// directed edge (pa(v), v), the pair (θ^{(v)}_{1|0}, θ^{(v)}_{1|1}).
// 2|E|+1 free values; complementary probabilities are implicit.
struct ThetaParams {
    TreeTopology tree; // rooted
    double root_p1 = 0.5;
    // indexed by child node id; unused at the root
    std::vector<double> cond_1g0;
    std::vector<double> cond_1g1;

    double theta(NodeId child, int parent_state) const {
        return parent_state ? cond_1g1[child] : cond_1g0[child];
    }
};

// Mean-offset / regression chart: μ̄_v per node, η_{u,v} per directed edge.
struct OmegaParams {
    TreeTopology tree;
    std::vector<double> mu_bar; // per node id
    std::vector<double> eta;    // indexed by child node id; unused at the root
};

// Normalized chart on the non-degenerate region: ρ̄_v per node, ρ_uv per edge.
struct RhoParams {
    TreeTopology tree;
    std::vector<double> rho_bar;  // per node id
    std::vector<double> rho_edge; // indexed by child node id

    double t_of(NodeId v) const; // t_v > 0
};

// Full joint over {0,1}^V; index bit v <-> node id v.
struct JointTable {
    TreeTopology tree;
    std::vector<double> values;
};

struct ConstraintViolation {
    std::string what; // which inequality failed, human readable
};

struct ConstraintReport {
    std::vector<ConstraintViolation> violations;
    bool ok() const { return violations.empty(); }
};

inline constexpr int kMaxJointNodes = 20;

ThetaParams make_theta(const TreeTopology& tree);
OmegaParams make_omega(const TreeTopology& tree);

// p_α(θ) = Π_v θ^{(v)}_{α_v|α_pa(v)} over all 2^|V| assignments
JointTable markov_joint(const ThetaParams& theta);

// f_T(θ): leaf marginal via a leaf-to-root elimination pass
ProbabilityTable model_forward(const ThetaParams& theta);

// η_{u,v} = θ^{(v)}_{1|1} - θ^{(v)}_{1|0}; μ̄_v = 1 - 2λ_v with λ propagated
// from the root
OmegaParams theta_to_omega(const ThetaParams& theta);

// inverse chart map; validates the Ω_T constraints first
ThetaParams omega_to_theta(const OmegaParams& omega);

// ψ_T: κ_I = ¼(1-μ̄_{r(I)}²) Π_{v∈V(I)\I} μ̄_v^{deg(v)-2} Π_{E(I)} η_{u,v},
// degrees taken in T(I). Requires every inner node degree <= 3.
TreeCumulants psi(const OmegaParams& omega);

// ψ through the trivalent expansion: η* = 1 on the new edges, μ̄* constant on
// contraction classes. Works for arbitrary inner degrees and agrees with the
// direct formula on T.
TreeCumulants psi_contracted(const OmegaParams& omega);

RhoParams omega_to_rho(const OmegaParams& omega);
OmegaParams rho_to_omega(const RhoParams& rho);

// Ω_T box: μ̄_r ∈ [-1,1] and per edge
//   -(1+μ̄_v) <= (1-μ̄_u) η_{u,v} <= 1-μ̄_v
//   -(1-μ̄_v) <= (1+μ̄_u) η_{u,v} <= 1+μ̄_v
ConstraintReport check_constraints(const OmegaParams& omega);

// the same region in the ρ chart: -t_u t_v <= ρ_uv <= t_u/t_v and
// -1/(t_u t_v) <= ρ_uv <= t_v/t_u
ConstraintReport check_constraints(const RhoParams& rho);

namespace detail {
// ψ without the trivalent degree cap; both psi and psi_contracted reduce to
// this evaluation.
TreeCumulants psi_formula(const OmegaParams& omega);
} // namespace detail

} // namespace latree
