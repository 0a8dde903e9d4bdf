#include "latree/coords.hpp"

#include <cmath>

#include "latree/error.hpp"

namespace latree {

namespace {

void check_n(int n) {
    if (n < 1 || n > kMaxDenseLeaves)
        throw InputError("dense tables support 1.." + std::to_string(kMaxDenseLeaves) +
                         " leaves, got " + std::to_string(n));
}

size_t table_size(int n) { return size_t(1) << n; }

} // namespace

ProbabilityTable make_table(int n) {
    check_n(n);
    ProbabilityTable p;
    p.n = n;
    p.values.assign(table_size(n), 0.0);
    return p;
}

std::vector<std::string> table_issues(const ProbabilityTable& p, const Tolerances& tol) {
    std::vector<std::string> issues;
    double sum = 0.0;
    for (size_t a = 0; a < p.values.size(); ++a) {
        sum += p.values[a];
        if (p.values[a] < -tol.zero_eps)
            issues.push_back("entry " + std::to_string(a) + " negative: " +
                             std::to_string(p.values[a]));
    }
    if (std::abs(sum - 1.0) > tol.zero_eps)
        issues.push_back("total mass " + std::to_string(sum) + " differs from 1");
    return issues;
}

bool validate_table(const ProbabilityTable& p, const Tolerances& tol) {
    return table_issues(p, tol).empty();
}

NoncentralMoments p_to_lambda(const ProbabilityTable& p) {
    check_n(p.n);
    NoncentralMoments l;
    l.n = p.n;
    l.values = p.values;
    size_t size = table_size(p.n);
    for (int i = 0; i < p.n; ++i) {
        size_t bit = size_t(1) << i;
        for (size_t a = 0; a < size; ++a)
            if (!(a & bit)) l.values[a] += l.values[a | bit];
    }
    return l;
}

ProbabilityTable lambda_to_p(const NoncentralMoments& l) {
    check_n(l.n);
    ProbabilityTable p;
    p.n = l.n;
    p.values = l.values;
    size_t size = table_size(l.n);
    for (int i = 0; i < l.n; ++i) {
        size_t bit = size_t(1) << i;
        for (size_t a = 0; a < size; ++a)
            if (!(a & bit)) p.values[a] -= p.values[a | bit];
    }
    return p;
}

CentralMoments lambda_to_mu(const NoncentralMoments& l) {
    check_n(l.n);
    CentralMoments m;
    m.n = l.n;
    m.means.resize(l.n);
    for (int i = 0; i < l.n; ++i) m.means[i] = l.values[size_t(1) << i];
    m.mu = l.values;
    size_t size = table_size(l.n);
    // recenter one coordinate at a time: E X_i (...) -> E (X_i - λ_i)(...)
    for (int i = 0; i < l.n; ++i) {
        size_t bit = size_t(1) << i;
        for (size_t a = 0; a < size; ++a)
            if (a & bit) m.mu[a] -= m.means[i] * m.mu[a ^ bit];
    }
    return m;
}

NoncentralMoments mu_to_lambda(const CentralMoments& m) {
    check_n(m.n);
    NoncentralMoments l;
    l.n = m.n;
    l.values = m.mu;
    size_t size = table_size(m.n);
    for (int i = 0; i < m.n; ++i) {
        size_t bit = size_t(1) << i;
        for (size_t a = 0; a < size; ++a)
            if (a & bit) l.values[a] += m.means[i] * l.values[a ^ bit];
    }
    return l;
}

namespace {

// The cumulant coordinate change lives on trees with inner degrees <= 3;
// higher-degree trees use the poset family of their (deterministic)
// trivalent expansion, whose cumulants the monomial parametrization hits.
TreeTopology poset_carrier(const TreeTopology& t) {
    for (NodeId v = 0; v < t.node_count(); ++v)
        if (t.is_inner(v) && t.degree(v) > 3) return trivalent_expansion(t).first;
    return t;
}

} // namespace

TreeCumulants mu_to_kappa(const TreeTopology& t, const CentralMoments& m) {
    check_n(m.n);
    if (t.leaf_count() != m.n)
        throw InputError("tree has " + std::to_string(t.leaf_count()) +
                         " leaves, moments have n = " + std::to_string(m.n));
    TreeTopology carrier = poset_carrier(t);
    TreeCumulants k;
    k.n = m.n;
    k.tree = t;
    k.means = m.means;
    k.kappa.assign(table_size(m.n), 0.0);
    for (LeafMask I = 0; I < LeafMask(table_size(m.n)); ++I) {
        int sz = mask_popcount(I);
        if (sz < 2) continue;
        EdgePartitionPoset poset = build_poset(carrier, I);
        const auto& col = poset.mobius_to_top();
        double sum = 0.0;
        for (int e = 0; e < poset.size(); ++e) {
            double prod = double(col[e]);
            if (prod == 0.0) continue;
            for (LeafMask b : poset.element(e).blocks) {
                prod *= m.mu[b];
                if (prod == 0.0) break;
            }
            sum += prod;
        }
        k.kappa[I] = sum;
    }
    return k;
}

CentralMoments kappa_to_mu(const TreeCumulants& k) {
    check_n(k.n);
    TreeTopology carrier = poset_carrier(k.tree);
    CentralMoments m;
    m.n = k.n;
    m.means = k.means;
    m.mu.assign(table_size(k.n), 0.0);
    m.mu[0] = 1.0;
    for (LeafMask I = 0; I < LeafMask(table_size(k.n)); ++I) {
        int sz = mask_popcount(I);
        if (sz < 2) continue;
        EdgePartitionPoset poset = build_poset(carrier, I);
        double sum = 0.0;
        for (int e = 0; e < poset.size(); ++e) {
            double prod = 1.0;
            for (LeafMask b : poset.element(e).blocks) {
                if (mask_popcount(b) < 2) { prod = 0.0; break; } // κ_i = 0
                prod *= k.kappa[b];
            }
            sum += prod;
        }
        m.mu[I] = sum;
    }
    return m;
}

double classical_cumulant(const CentralMoments& m, LeafMask I) {
    int sz = mask_popcount(I);
    if (sz < 2) throw InputError("classical cumulant needs |I| >= 2");
    double sum = 0.0;
    for (const SetPartition& sp : enumerate_set_partitions(I)) {
        double prod = double(classical_mobius_top(sp));
        for (LeafMask b : sp.blocks) {
            if (mask_popcount(b) == 1) { prod = 0.0; break; }
            prod *= m.mu[b];
        }
        sum += prod;
    }
    return sum;
}

CorrelationCoords kappa_to_rho(const TreeCumulants& k) {
    check_n(k.n);
    CorrelationCoords r;
    r.n = k.n;
    r.rho_bar.resize(k.n);
    std::vector<double> sd(k.n); // sqrt(1-μ̄_i²)
    for (int i = 1; i <= k.n; ++i) {
        double mb = k.mu_bar(i);
        if (mb * mb >= 1.0)
            throw InputError("degenerate leaf margin at leaf " + std::to_string(i));
        sd[i - 1] = std::sqrt(1.0 - mb * mb);
        r.rho_bar[i - 1] = 2.0 * mb / sd[i - 1];
    }
    r.rho.assign(k.kappa.size(), 0.0);
    for (LeafMask I = 0; I < LeafMask(k.kappa.size()); ++I) {
        if (mask_popcount(I) < 2) continue;
        double denom = 1.0;
        for (int lab : mask_labels(I)) denom *= sd[lab - 1];
        r.rho[I] = std::ldexp(k.kappa[I], mask_popcount(I)) / denom;
    }
    return r;
}

} // namespace latree
