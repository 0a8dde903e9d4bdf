#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "latree/coords.hpp"
#include "latree/params.hpp"
#include "latree/tree.hpp"

namespace latree {

// Observed means plus pairwise and triple central moments, with magnitudes
// below zero_tol snapped to exact zeros. Borderline magnitudes in
// (zero_tol, 10*zero_tol) are listed as warnings.
struct CovarianceSummary {
    int n = 0;
    std::vector<double> mu_bar_leaf; // μ̂_i = 1 - 2λ_i, index label-1
    std::vector<double> m23;         // dense over masks; |I| in {2,3} populated
    double zero_tol = 0.0;
    std::vector<std::string> warnings;

    double pair(int i, int j) const {
        return m23[(LeafMask(1) << (i - 1)) | (LeafMask(1) << (j - 1))];
    }
    double triple(int i, int j, int k) const {
        return m23[(LeafMask(1) << (i - 1)) | (LeafMask(1) << (j - 1)) |
                   (LeafMask(1) << (k - 1))];
    }
};

struct EdgeClasses {
    std::vector<std::vector<Edge>> isolated; // [Ê], connected subgraphs
    std::vector<std::vector<Edge>> active;   // [E\Ê], each ordered as a path
};

enum class FiberClass { FiniteSmooth, ManifoldWithCorners, Singular };

std::string to_string(FiberClass c);

// constraints η = 0 on Ê and μ̄² = 1 on V̂, plus the inclusion-minimal pairs
// (V₀, E₀) whose constraint set already forces every observed zero
struct DeepestSingularity {
    std::vector<Edge> eta_zero_edges;
    std::vector<NodeId> mu_sq_one_nodes;
    std::vector<std::pair<std::vector<NodeId>, std::vector<Edge>>> minimal_pairs;
};

// invariants of a non-singleton active class: the aggregate regression
// coefficient across the path and the squared covariance of its endpoints
struct PathClassInvariant {
    std::vector<Edge> edges; // ordered along the path
    NodeId rootward = -1;
    NodeId leafward = -1;
    double eta_sq = 0.0; // regression of leafward on rootward, squared
    double mu_sq = 0.0;  // Cov(Y_rootward, Y_leafward)²
};

struct RecoveredSquares {
    std::vector<double> leaf_mu_bar;            // signed values, index label-1
    std::map<NodeId, double> node_mu_bar_sq;    // inner nodes of degree >= 3 in T̂
    std::map<Edge, double> edge_eta_sq;         // singleton classes; 0 on Ê
    std::vector<PathClassInvariant> path_classes;
};

struct FiberReport {
    FiberClass classification = FiberClass::FiniteSmooth;
    long long count = 0;  // FiniteSmooth: 2^{|V|-n}
    int dimension = 0;    // ManifoldWithCorners: 2*l2
    std::vector<Edge> isolated;
    Forest forest;        // T̂
    EdgeClasses classes;
    std::vector<NodeId> degenerate_nodes; // V̂
    std::optional<RecoveredSquares> recovered;
    std::optional<DeepestSingularity> deepest;
    std::vector<OmegaParams> points; // all fiber points when finite
    std::vector<std::string> warnings;
};

CovarianceSummary covariance_summary(const CentralMoments& m, double eps);

// Ê: edges e with μ̂_ij = 0 for every leaf pair whose path crosses e
std::vector<Edge> isolated_edges(const TreeTopology& t, const CovarianceSummary& c);

// transitive closure of e ~ e' (adjacent with all edges incident to both
// isolated), separately inside Ê and E\Ê
EdgeClasses edge_classes(const TreeTopology& t, const std::vector<Edge>& isolated);

// T̂ = T\Ê and V̂ = inner nodes of degree < 2 in T̂
std::pair<Forest, std::vector<NodeId>> p_forest_and_degenerates(
    const TreeTopology& t, const std::vector<Edge>& isolated);

// classification by the degree pattern of T̂; no points, no recovered squares
FiberReport classify_fiber(const TreeTopology& t, const CovarianceSummary& c);

struct TripodSquares {
    double mu_bar_h_sq = 0.0;
    double eta_i_sq = 0.0;
    double eta_j_sq = 0.0;
    double eta_k_sq = 0.0;
};

// closed-form recovery from one triple of leaves; needs μ̂_ij μ̂_ik μ̂_jk != 0
TripodSquares recover_tripod(const CovarianceSummary& c, int i, int j, int k);

// squared parameters (and per-class invariants in the manifold case) from the
// observed summary; consistency_tol guards cross-checks across admissible
// leaf choices
RecoveredSquares recover_parameters(const TreeTopology& t, const CovarianceSummary& c,
                                    const FiberReport& shape,
                                    double consistency_tol = 1e-8);

// one ω reproducing k under ψ, with signs pinned by the pair and triple
// cumulants; FiniteSmooth classification only
OmegaParams consistent_sign_assignment(const TreeTopology& t, const TreeCumulants& k,
                                       const RecoveredSquares& squares,
                                       double verify_tol = 1e-8);

// δ_h: negate μ̄_h and η on every edge incident to h
OmegaParams local_sign_switch(const OmegaParams& omega, NodeId h);

// the full switching orbit, 2^m points over the m inner nodes
std::vector<OmegaParams> enumerate_fiber(const OmegaParams& omega);

DeepestSingularity deepest_singularity(const TreeTopology& t,
                                       const std::vector<Edge>& isolated,
                                       const std::vector<NodeId>& degenerates,
                                       const CovarianceSummary& c);

// classify + recover + (when finite) enumerate the fiber, in one pass
FiberReport recover_fiber(const TreeTopology& t, const CentralMoments& m,
                          double eps, double consistency_tol = 1e-8);

} // namespace latree
