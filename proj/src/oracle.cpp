#include "latree/oracle.hpp"

#include <cmath>

#include "latree/error.hpp"

namespace latree {
namespace oracle {

FullJoint joint_by_enumeration(const ThetaParams& theta) {
    const TreeTopology& t = theta.tree;
    int nv = t.node_count();
    if (nv > kMaxJointNodes)
        throw InputError("oracle joint capped at " + std::to_string(kMaxJointNodes) + " nodes");
    FullJoint j;
    j.tree = t;
    j.table.assign(size_t(1) << nv, 0.0);
    NodeId r = t.root();
    for (size_t a = 0; a < j.table.size(); ++a) {
        double p = ((a >> r) & 1) ? theta.root_p1 : 1.0 - theta.root_p1;
        for (NodeId v = 0; v < nv && p != 0.0; ++v) {
            if (v == r) continue;
            int sv = int((a >> v) & 1);
            int su = int((a >> t.parent(v)) & 1);
            double t1 = su ? theta.cond_1g1[v] : theta.cond_1g0[v];
            p *= sv ? t1 : 1.0 - t1;
        }
        j.table[a] = p;
    }
    return j;
}

ProbabilityTable marginalize_leaves(const FullJoint& j) {
    const TreeTopology& t = j.tree;
    int n = t.leaf_count();
    ProbabilityTable p = make_table(n);
    for (size_t a = 0; a < j.table.size(); ++a) {
        LeafMask beta = 0;
        for (int lab = 1; lab <= n; ++lab)
            if ((a >> t.leaf_node(lab)) & 1) beta |= LeafMask(1) << (lab - 1);
        p.values[beta] += j.table[a];
    }
    return p;
}

namespace {

double node_mean(const FullJoint& j, NodeId v) {
    double m = 0.0;
    for (size_t a = 0; a < j.table.size(); ++a)
        if ((a >> v) & 1) m += j.table[a];
    return m;
}

} // namespace

double central_moment(const FullJoint& j, const std::vector<NodeId>& s) {
    std::vector<double> means;
    for (NodeId v : s) means.push_back(node_mean(j, v));
    double acc = 0.0;
    for (size_t a = 0; a < j.table.size(); ++a) {
        if (j.table[a] == 0.0) continue;
        double term = j.table[a];
        for (size_t i = 0; i < s.size(); ++i)
            term *= double((a >> s[i]) & 1) - means[i];
        acc += term;
    }
    return acc;
}

namespace {

std::vector<NodeId> subset_nodes(const std::vector<NodeId>& pool, uint32_t mask) {
    std::vector<NodeId> out;
    for (size_t i = 0; i < pool.size(); ++i)
        if ((mask >> i) & 1) out.push_back(pool[i]);
    return out;
}

void check_disjoint(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
    for (NodeId x : a)
        for (NodeId y : b)
            if (x == y) throw InputError("node sets must be disjoint");
}

} // namespace

bool check_independence(const FullJoint& j, const std::vector<NodeId>& a,
                        const std::vector<NodeId>& b, double tol) {
    check_disjoint(a, b);
    for (uint32_t ia = 1; ia < (uint32_t(1) << a.size()); ++ia)
        for (uint32_t ib = 1; ib < (uint32_t(1) << b.size()); ++ib) {
            auto sa = subset_nodes(a, ia);
            auto sb = subset_nodes(b, ib);
            auto sab = sa;
            sab.insert(sab.end(), sb.begin(), sb.end());
            double lhs = central_moment(j, sab);
            double rhs = central_moment(j, sa) * central_moment(j, sb);
            if (std::abs(lhs - rhs) > tol) return false;
        }
    return true;
}

namespace {

// η_{h,I} = E(U_I U_h) / Var(H_h)
double eta_h(const FullJoint& j, NodeId h, const std::vector<NodeId>& s, double var_h) {
    auto sh = s;
    sh.push_back(h);
    return central_moment(j, sh) / var_h;
}

} // namespace

bool check_conditional_independence(const FullJoint& j, const std::vector<NodeId>& a,
                                    const std::vector<NodeId>& b, NodeId h, double tol) {
    check_disjoint(a, b);
    for (NodeId x : a)
        if (x == h) throw InputError("conditioning node inside A");
    for (NodeId x : b)
        if (x == h) throw InputError("conditioning node inside B");
    double lh = node_mean(j, h);
    double var_h = lh * (1.0 - lh);
    if (var_h <= 0.0) throw InputError("conditioning variable is degenerate");

    for (uint32_t ia = 1; ia < (uint32_t(1) << a.size()); ++ia)
        for (uint32_t ib = 1; ib < (uint32_t(1) << b.size()); ++ib) {
            auto sa = subset_nodes(a, ia);
            auto sb = subset_nodes(b, ib);
            auto sab = sa;
            sab.insert(sab.end(), sb.begin(), sb.end());
            double mu_i = central_moment(j, sa);
            double mu_j = central_moment(j, sb);
            double mu_ij = central_moment(j, sab);
            double eta_i = eta_h(j, h, sa, var_h);
            double eta_j = eta_h(j, h, sb, var_h);
            double eta_ij = eta_h(j, h, sab, var_h);
            if (std::abs(mu_ij - (mu_i * mu_j + var_h * eta_i * eta_j)) > tol) return false;
            double rhs = mu_i * eta_j + eta_i * mu_j + (1.0 - 2.0 * lh) * eta_i * eta_j;
            if (std::abs(eta_ij - rhs) > tol) return false;
        }
    return true;
}

bool check_conditional_independence_direct(const FullJoint& j, const std::vector<NodeId>& a,
                                           const std::vector<NodeId>& b, NodeId h, double tol) {
    check_disjoint(a, b);
    double lh = node_mean(j, h);
    if (lh <= 0.0 || lh >= 1.0) throw InputError("conditioning variable is degenerate");
    // Cov(U_I, U_J | H_h = s) = 0 for both s, with U centered at the
    // unconditional means
    std::vector<double> mean_a, mean_b;
    for (NodeId v : a) mean_a.push_back(node_mean(j, v));
    for (NodeId v : b) mean_b.push_back(node_mean(j, v));

    for (uint32_t ia = 1; ia < (uint32_t(1) << a.size()); ++ia)
        for (uint32_t ib = 1; ib < (uint32_t(1) << b.size()); ++ib)
            for (int s = 0; s <= 1; ++s) {
                double ph = s ? lh : 1.0 - lh;
                double e_ij = 0.0, e_i = 0.0, e_j = 0.0;
                for (size_t x = 0; x < j.table.size(); ++x) {
                    if (int((x >> h) & 1) != s || j.table[x] == 0.0) continue;
                    double w = j.table[x] / ph;
                    double ui = 1.0, uj = 1.0;
                    for (size_t i = 0; i < a.size(); ++i)
                        if ((ia >> i) & 1) ui *= double((x >> a[i]) & 1) - mean_a[i];
                    for (size_t i = 0; i < b.size(); ++i)
                        if ((ib >> i) & 1) uj *= double((x >> b[i]) & 1) - mean_b[i];
                    e_ij += w * ui * uj;
                    e_i += w * ui;
                    e_j += w * uj;
                }
                if (std::abs(e_ij - e_i * e_j) > tol) return false;
            }
    return true;
}

bool global_markov_check(const TreeTopology& t, const FullJoint& j, double tol) {
    int nv = t.node_count();

    auto conditional_holds = [&](const std::vector<NodeId>& a, const std::vector<NodeId>& b,
                                 const std::vector<NodeId>& c) {
        // direct definition: P(y_A, y_B | y_C) factorizes for every y_C with
        // positive probability
        size_t csz = size_t(1) << c.size();
        for (size_t cc = 0; cc < csz; ++cc) {
            double pc = 0.0;
            for (size_t x = 0; x < j.table.size(); ++x) {
                bool match = true;
                for (size_t i = 0; i < c.size() && match; ++i)
                    if (size_t((x >> c[i]) & 1) != ((cc >> i) & 1)) match = false;
                if (match) pc += j.table[x];
            }
            if (pc <= tol) continue;
            size_t asz = size_t(1) << a.size(), bsz = size_t(1) << b.size();
            for (size_t aa = 0; aa < asz; ++aa)
                for (size_t bb = 0; bb < bsz; ++bb) {
                    double pab = 0.0, pa = 0.0, pb = 0.0;
                    for (size_t x = 0; x < j.table.size(); ++x) {
                        bool mc = true;
                        for (size_t i = 0; i < c.size() && mc; ++i)
                            if (size_t((x >> c[i]) & 1) != ((cc >> i) & 1)) mc = false;
                        if (!mc) continue;
                        bool ma = true, mb = true;
                        for (size_t i = 0; i < a.size() && ma; ++i)
                            if (size_t((x >> a[i]) & 1) != ((aa >> i) & 1)) ma = false;
                        for (size_t i = 0; i < b.size() && mb; ++i)
                            if (size_t((x >> b[i]) & 1) != ((bb >> i) & 1)) mb = false;
                        if (ma && mb) pab += j.table[x];
                        if (ma) pa += j.table[x];
                        if (mb) pb += j.table[x];
                    }
                    if (std::abs(pab / pc - (pa / pc) * (pb / pc)) > tol) return false;
                }
        }
        return true;
    };

    auto run = [&](const std::vector<NodeId>& a, const std::vector<NodeId>& b,
                   const std::vector<NodeId>& c) {
        if (a.empty() || b.empty()) return true;
        if (!separates(t, a, b, c)) return true;
        return conditional_holds(a, b, c);
    };

    if (nv <= 8) {
        // every assignment of nodes to {A, B, C, out}
        size_t total = 1;
        for (int i = 0; i < nv; ++i) total *= 4;
        for (size_t code = 0; code < total; ++code) {
            std::vector<NodeId> a, b, c;
            size_t x = code;
            for (NodeId v = 0; v < nv; ++v, x /= 4) {
                switch (x % 4) {
                    case 1: a.push_back(v); break;
                    case 2: b.push_back(v); break;
                    case 3: c.push_back(v); break;
                    default: break;
                }
            }
            if (!run(a, b, c)) return false;
        }
        return true;
    }

    // reduced sweep: singleton separators plus the full inner-node separator
    std::vector<std::vector<NodeId>> separators;
    for (NodeId v = 0; v < nv; ++v) separators.push_back({v});
    std::vector<NodeId> inner;
    for (NodeId v = 0; v < nv; ++v)
        if (t.is_inner(v)) inner.push_back(v);
    separators.push_back(inner);
    for (const auto& c : separators) {
        std::vector<char> in_c(nv, 0);
        for (NodeId v : c) in_c[v] = 1;
        std::vector<NodeId> rest;
        for (NodeId v = 0; v < nv; ++v)
            if (!in_c[v]) rest.push_back(v);
        for (NodeId x : rest)
            for (NodeId y : rest) {
                if (x >= y) continue;
                if (!run({x}, {y}, c)) return false;
            }
    }
    return true;
}

} // namespace oracle
} // namespace latree
