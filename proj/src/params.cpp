#include "latree/params.hpp"

#include <cmath>
#include <functional>
#include <set>

#include "latree/error.hpp"

namespace latree {

namespace {

void check_rooted(const TreeTopology& t) {
    if (!t.rooted()) throw InputError("parameter charts need a rooted tree");
}

void check_unit(double x, const std::string& what) {
    if (!(x >= 0.0 && x <= 1.0))
        throw InputError(what + " = " + std::to_string(x) + " outside [0,1]");
}

std::vector<NodeId> topo_order(const TreeTopology& t) {
    // root first, children after parents
    std::vector<NodeId> order;
    order.reserve(t.node_count());
    std::vector<NodeId> stack{t.root()};
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        order.push_back(v);
        for (NodeId w : t.neighbors(v))
            if (w != t.parent(v)) stack.push_back(w);
    }
    return order;
}

} // namespace

ThetaParams make_theta(const TreeTopology& tree) {
    check_rooted(tree);
    ThetaParams th;
    th.tree = tree;
    th.cond_1g0.assign(tree.node_count(), 0.0);
    th.cond_1g1.assign(tree.node_count(), 0.0);
    return th;
}

OmegaParams make_omega(const TreeTopology& tree) {
    check_rooted(tree);
    OmegaParams om;
    om.tree = tree;
    om.mu_bar.assign(tree.node_count(), 0.0);
    om.eta.assign(tree.node_count(), 0.0);
    return om;
}

JointTable markov_joint(const ThetaParams& theta) {
    const TreeTopology& t = theta.tree;
    check_rooted(t);
    int nv = t.node_count();
    if (nv > kMaxJointNodes)
        throw InputError("joint table capped at " + std::to_string(kMaxJointNodes) + " nodes");
    check_unit(theta.root_p1, "root probability");
    for (NodeId v = 0; v < nv; ++v)
        if (v != t.root()) {
            check_unit(theta.cond_1g0[v], "theta_1|0");
            check_unit(theta.cond_1g1[v], "theta_1|1");
        }

    JointTable j;
    j.tree = t;
    j.values.assign(size_t(1) << nv, 0.0);
    auto order = topo_order(t);
    for (size_t a = 0; a < j.values.size(); ++a) {
        int root_state = int((a >> t.root()) & 1);
        double p = root_state ? theta.root_p1 : 1.0 - theta.root_p1;
        for (NodeId v : order) {
            if (v == t.root() || p == 0.0) continue;
            int sv = int((a >> v) & 1);
            int su = int((a >> t.parent(v)) & 1);
            double t1 = theta.theta(v, su);
            p *= sv ? t1 : 1.0 - t1;
        }
        j.values[a] = p;
    }
    return j;
}

ProbabilityTable model_forward(const ThetaParams& theta) {
    const TreeTopology& t = theta.tree;
    check_rooted(t);
    int n = t.leaf_count();
    if (n > kMaxDenseLeaves)
        throw InputError("leaf tables capped at " + std::to_string(kMaxDenseLeaves) + " leaves");
    check_unit(theta.root_p1, "root probability");
    for (NodeId v = 0; v < t.node_count(); ++v)
        if (v != t.root()) {
            check_unit(theta.cond_1g0[v], "theta_1|0");
            check_unit(theta.cond_1g1[v], "theta_1|1");
        }

    ProbabilityTable p = make_table(n);
    auto order = topo_order(t);
    std::vector<double> msg0(t.node_count()), msg1(t.node_count());
    for (LeafMask beta = 0; beta < LeafMask(p.values.size()); ++beta) {
        // upward pass: msg_s(v) = P(leaf pattern below v | Y_v = s)
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            NodeId v = *it;
            if (t.is_leaf(v) && v != t.root()) {
                int obs = int((beta >> (t.leaf_label(v) - 1)) & 1);
                msg0[v] = obs == 0 ? 1.0 : 0.0;
                msg1[v] = obs == 1 ? 1.0 : 0.0;
                continue;
            }
            double m0 = 1.0, m1 = 1.0;
            for (NodeId c : t.neighbors(v)) {
                if (c == t.parent(v)) continue;
                double c0 = theta.cond_1g0[c], c1 = theta.cond_1g1[c];
                m0 *= (1.0 - c0) * msg0[c] + c0 * msg1[c];
                m1 *= (1.0 - c1) * msg0[c] + c1 * msg1[c];
            }
            msg0[v] = m0;
            msg1[v] = m1;
        }
        NodeId r = t.root();
        if (t.is_leaf(r)) {
            // an observed root contributes only its observed state
            int obs = int((beta >> (t.leaf_label(r) - 1)) & 1);
            p.values[beta] = obs ? theta.root_p1 * msg1[r] : (1.0 - theta.root_p1) * msg0[r];
        } else {
            p.values[beta] = (1.0 - theta.root_p1) * msg0[r] + theta.root_p1 * msg1[r];
        }
    }
    return p;
}

OmegaParams theta_to_omega(const ThetaParams& theta) {
    const TreeTopology& t = theta.tree;
    check_rooted(t);
    OmegaParams om = make_omega(t);
    std::vector<double> lambda(t.node_count(), 0.0);
    for (NodeId v : topo_order(t)) {
        if (v == t.root()) {
            lambda[v] = theta.root_p1;
        } else {
            double lu = lambda[t.parent(v)];
            lambda[v] = lu * theta.cond_1g1[v] + (1.0 - lu) * theta.cond_1g0[v];
            om.eta[v] = theta.cond_1g1[v] - theta.cond_1g0[v];
        }
        om.mu_bar[v] = 1.0 - 2.0 * lambda[v];
    }
    return om;
}

ThetaParams omega_to_theta(const OmegaParams& omega) {
    const TreeTopology& t = omega.tree;
    check_rooted(t);
    ConstraintReport rep = check_constraints(omega);
    if (!rep.ok()) {
        std::string msg = "omega violates the parameter-space constraints:";
        for (const auto& v : rep.violations) msg += " [" + v.what + "]";
        throw InputError(msg);
    }
    ThetaParams th = make_theta(t);
    th.root_p1 = (1.0 - omega.mu_bar[t.root()]) / 2.0;
    for (NodeId v = 0; v < t.node_count(); ++v) {
        if (v == t.root()) continue;
        NodeId u = t.parent(v);
        double mv = omega.mu_bar[v], mu = omega.mu_bar[u], e = omega.eta[v];
        th.cond_1g0[v] = (1.0 - mv) / 2.0 - e * (1.0 - mu) / 2.0;
        th.cond_1g1[v] = (1.0 - mv) / 2.0 + e * (1.0 + mu) / 2.0;
        // clamp roundoff so the image stays inside Θ_T
        th.cond_1g0[v] = std::min(1.0, std::max(0.0, th.cond_1g0[v]));
        th.cond_1g1[v] = std::min(1.0, std::max(0.0, th.cond_1g1[v]));
    }
    return th;
}

namespace detail {

TreeCumulants psi_formula(const OmegaParams& omega) {
    const TreeTopology& t = omega.tree;
    check_rooted(t);
    int n = t.leaf_count();
    if (n > kMaxDenseLeaves)
        throw InputError("leaf tables capped at " + std::to_string(kMaxDenseLeaves) + " leaves");

    TreeCumulants k;
    k.n = n;
    k.tree = t;
    k.means.resize(n);
    for (int lab = 1; lab <= n; ++lab)
        k.means[lab - 1] = (1.0 - omega.mu_bar[t.leaf_node(lab)]) / 2.0;
    k.kappa.assign(size_t(1) << n, 0.0);

    for (LeafMask I = 0; I < LeafMask(k.kappa.size()); ++I) {
        if (mask_popcount(I) < 2) continue;
        std::vector<NodeId> leaf_nodes;
        for (int lab : mask_labels(I)) leaf_nodes.push_back(t.leaf_node(lab));
        Subtree sub = spanning_subtree(t, leaf_nodes);

        double mr = omega.mu_bar[sub.local_root];
        double val = 0.25 * (1.0 - mr * mr);
        for (NodeId v : sub.nodes) {
            if (t.leaf_label(v) > 0 && (I >> (t.leaf_label(v) - 1)) & 1) continue;
            int d = sub.degree(v) - 2;
            for (int q = 0; q < d; ++q) val *= omega.mu_bar[v];
        }
        for (const Edge& e : sub.edges) {
            // directed parent -> child under the root
            NodeId child = t.parent(e.v) == e.u ? e.v : e.u;
            val *= omega.eta[child];
        }
        k.kappa[I] = val;
    }
    return k;
}

} // namespace detail

TreeCumulants psi(const OmegaParams& omega) {
    const TreeTopology& t = omega.tree;
    for (NodeId v = 0; v < t.node_count(); ++v)
        if (t.is_inner(v) && t.degree(v) > 3)
            throw InputError("psi needs inner degrees <= 3 (node " + t.node_ref(v) +
                             " has degree " + std::to_string(t.degree(v)) +
                             "); route through psi_contracted");
    return detail::psi_formula(omega);
}

TreeCumulants psi_contracted(const OmegaParams& omega) {
    const TreeTopology& t = omega.tree;
    check_rooted(t);
    bool needs_expansion = false;
    for (NodeId v = 0; v < t.node_count(); ++v)
        if (t.is_inner(v) && t.degree(v) > 3) needs_expansion = true;
    if (!needs_expansion) return detail::psi_formula(omega);
    auto [star, added] = trivalent_expansion(t);

    // contraction class of each star node: union over the added edges, with
    // the (unique, lowest-id) original node as representative
    std::vector<NodeId> cls(star.node_count());
    for (NodeId v = 0; v < star.node_count(); ++v) cls[v] = v;
    std::function<NodeId(NodeId)> find = [&](NodeId x) {
        while (cls[x] != x) x = cls[x] = cls[cls[x]];
        return x;
    };
    std::set<Edge> fresh_edges(added.begin(), added.end());
    for (const Edge& e : added) {
        NodeId a = find(e.u), b = find(e.v);
        if (a != b) cls[std::max(a, b)] = std::min(a, b);
    }
    for (NodeId v = 0; v < star.node_count(); ++v) cls[v] = find(v);
    for (NodeId v = 0; v < star.node_count(); ++v)
        if (cls[v] >= t.node_count())
            throw InternalError("expansion class lost its original node");

    OmegaParams om2 = make_omega(star);
    for (NodeId v = 0; v < star.node_count(); ++v) om2.mu_bar[v] = omega.mu_bar[cls[v]];
    for (NodeId c = 0; c < star.node_count(); ++c) {
        if (c == star.root()) continue;
        NodeId p = star.parent(c);
        if (fresh_edges.count(Edge(p, c))) {
            om2.eta[c] = 1.0;
        } else {
            if (t.parent(cls[c]) != cls[p])
                throw InternalError("expansion flipped an edge orientation");
            om2.eta[c] = omega.eta[cls[c]];
        }
    }
    TreeCumulants k = detail::psi_formula(om2);
    k.tree = t;
    return k;
}

RhoParams omega_to_rho(const OmegaParams& omega) {
    const TreeTopology& t = omega.tree;
    check_rooted(t);
    RhoParams r;
    r.tree = t;
    r.rho_bar.assign(t.node_count(), 0.0);
    r.rho_edge.assign(t.node_count(), 0.0);
    for (NodeId v = 0; v < t.node_count(); ++v) {
        double m = omega.mu_bar[v];
        if (m * m >= 1.0)
            throw InputError("degenerate node " + t.node_ref(v) + " (μ̄² >= 1)");
        r.rho_bar[v] = 2.0 * m / std::sqrt(1.0 - m * m);
    }
    for (NodeId v = 0; v < t.node_count(); ++v) {
        if (v == t.root()) continue;
        NodeId u = t.parent(v);
        double mu = omega.mu_bar[u], mv = omega.mu_bar[v];
        r.rho_edge[v] = std::sqrt((1.0 - mu * mu) / (1.0 - mv * mv)) * omega.eta[v];
    }
    return r;
}

OmegaParams rho_to_omega(const RhoParams& rho) {
    const TreeTopology& t = rho.tree;
    check_rooted(t);
    OmegaParams om = make_omega(t);
    for (NodeId v = 0; v < t.node_count(); ++v) {
        double rb = rho.rho_bar[v];
        om.mu_bar[v] = rb / std::sqrt(4.0 + rb * rb);
    }
    for (NodeId v = 0; v < t.node_count(); ++v) {
        if (v == t.root()) continue;
        NodeId u = t.parent(v);
        double ru = rho.rho_bar[u], rv = rho.rho_bar[v];
        om.eta[v] = std::sqrt((4.0 + ru * ru) / (4.0 + rv * rv)) * rho.rho_edge[v];
    }
    return om;
}

double RhoParams::t_of(NodeId v) const {
    double rb = rho_bar[v];
    return std::sqrt(1.0 + (rb / 2.0) * (rb / 2.0)) + rb / 2.0;
}

namespace {

void check_ineq(ConstraintReport& rep, double lo, double x, double hi,
                const std::string& what) {
    constexpr double slack = 1e-12; // boundary counts as valid
    if (x < lo - slack || x > hi + slack)
        rep.violations.push_back({what + ": " + std::to_string(x) + " outside [" +
                                  std::to_string(lo) + ", " + std::to_string(hi) + "]"});
}

} // namespace

ConstraintReport check_constraints(const OmegaParams& omega) {
    const TreeTopology& t = omega.tree;
    check_rooted(t);
    ConstraintReport rep;
    double mr = omega.mu_bar[t.root()];
    check_ineq(rep, -1.0, mr, 1.0, "μ̄ at root " + t.node_ref(t.root()));
    for (NodeId v = 0; v < t.node_count(); ++v) {
        if (v == t.root()) continue;
        NodeId u = t.parent(v);
        double mu = omega.mu_bar[u], mv = omega.mu_bar[v], e = omega.eta[v];
        std::string tag = "edge (" + t.node_ref(u) + "," + t.node_ref(v) + ")";
        check_ineq(rep, -(1.0 + mv), (1.0 - mu) * e, 1.0 - mv, tag + " lower pair");
        check_ineq(rep, -(1.0 - mv), (1.0 + mu) * e, 1.0 + mv, tag + " upper pair");
    }
    return rep;
}

ConstraintReport check_constraints(const RhoParams& rho) {
    const TreeTopology& t = rho.tree;
    check_rooted(t);
    ConstraintReport rep;
    for (NodeId v = 0; v < t.node_count(); ++v) {
        if (v == t.root()) continue;
        NodeId u = t.parent(v);
        double tu = rho.t_of(u), tv = rho.t_of(v), r = rho.rho_edge[v];
        std::string tag = "edge (" + t.node_ref(u) + "," + t.node_ref(v) + ")";
        check_ineq(rep, -tu * tv, r, tu / tv, tag + " first pair");
        check_ineq(rep, -1.0 / (tu * tv), r, tv / tu, tag + " second pair");
    }
    return rep;
}

} // namespace latree
