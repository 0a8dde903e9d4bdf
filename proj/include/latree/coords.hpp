#pragma once

#include <string>
#include <vector>

#include "latree/partition.hpp"
#include "latree/tree.hpp"

namespace latree {

// Shared numeric policy. zero_eps is the default zero test; magnitudes in
// (zero_eps, warn_factor*zero_eps) are flagged as borderline by consumers.
struct Tolerances {
    double zero_eps = 1e-9;
    double warn_factor = 10.0;
};

inline constexpr int kMaxDenseLeaves = 16;

// Joint distribution of n binary leaf variables, dense over {0,1}^n.
// Index is the leaf bitmask: leaf 1 <-> bit 0.
struct ProbabilityTable {
    int n = 0;
    std::vector<double> values;

    double& operator[](LeafMask a) { return values[a]; }
    double operator[](LeafMask a) const { return values[a]; }
};

// Non-central moments λ_I = E Π_{i∈I} X_i for every I; λ_∅ = 1.
struct NoncentralMoments {
    int n = 0;
    std::vector<double> values;

    double& operator[](LeafMask a) { return values[a]; }
    double operator[](LeafMask a) const { return values[a]; }
};

// Means λ_1..λ_n plus central moments μ_I = E Π_{i∈I}(X_i - λ_i);
// μ_∅ = 1, μ_{i} = 0.
struct CentralMoments {
    int n = 0;
    std::vector<double> means; // size n, index label-1
    std::vector<double> mu;    // size 2^n

    double mean(int label) const { return means[label - 1]; }
};

// Tree cumulants of a fixed tree: κ_I for |I| >= 2 plus the means;
// κ_∅ = κ_i = 0 by convention, and κ_I = μ_I whenever |I| <= 3.
struct TreeCumulants {
    int n = 0;
    TreeTopology tree;
    std::vector<double> means;
    std::vector<double> kappa;

    double mean(int label) const { return means[label - 1]; }
    // leaf mean-offset μ̄_i = 1 - 2λ_i
    double mu_bar(int label) const { return 1.0 - 2.0 * means[label - 1]; }
};

// Correlation coordinates ρ̄_i, ρ_I (|I| >= 2); ρ_ij is the usual correlation.
struct CorrelationCoords {
    int n = 0;
    std::vector<double> rho_bar; // size n
    std::vector<double> rho;     // size 2^n, entries for |I| >= 2
};

ProbabilityTable make_table(int n);

// entries >= -zero_eps and total mass 1 within zero_eps
bool validate_table(const ProbabilityTable& p, const Tolerances& tol = {});
std::vector<std::string> table_issues(const ProbabilityTable& p, const Tolerances& tol = {});

// λ_α = Σ_{β ⊇ α} p_β
NoncentralMoments p_to_lambda(const ProbabilityTable& p);

// p_α = Σ_{β ⊇ α} (-1)^{|β\α|} λ_β
ProbabilityTable lambda_to_p(const NoncentralMoments& l);

CentralMoments lambda_to_mu(const NoncentralMoments& l);
NoncentralMoments mu_to_lambda(const CentralMoments& m);

// κ_I = Σ_{π ∈ Π_{T(I)}} m_I(π, 1̂_I) Π_{B∈π} μ_B
TreeCumulants mu_to_kappa(const TreeTopology& t, const CentralMoments& m);

// μ_I = Σ_{π ∈ Π_{T(I)}} Π_{B∈π} κ_B
CentralMoments kappa_to_mu(const TreeCumulants& k);

// classical cumulant over the full partition lattice of I, |I| in [2, 10]
double classical_cumulant(const CentralMoments& m, LeafMask I);

// ρ_I = 2^{|I|} κ_I / Π_{i∈I} sqrt(1-μ̄_i²); needs μ̄_i² < 1 at every leaf
CorrelationCoords kappa_to_rho(const TreeCumulants& k);

} // namespace latree
