#include "latree/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "latree/error.hpp"

namespace latree {

std::string to_string(FiberClass c) {
    switch (c) {
        case FiberClass::FiniteSmooth: return "finite_smooth";
        case FiberClass::ManifoldWithCorners: return "manifold_with_corners";
        case FiberClass::Singular: return "singular";
    }
    return "?";
}

CovarianceSummary covariance_summary(const CentralMoments& m, double eps) {
    if (eps < 0.0) throw InputError("zero tolerance must be >= 0");
    CovarianceSummary c;
    c.n = m.n;
    c.zero_tol = eps;
    c.mu_bar_leaf.resize(m.n);
    for (int i = 1; i <= m.n; ++i) c.mu_bar_leaf[i - 1] = 1.0 - 2.0 * m.mean(i);
    c.m23.assign(m.mu.size(), 0.0);
    for (LeafMask I = 0; I < LeafMask(m.mu.size()); ++I) {
        int sz = mask_popcount(I);
        if (sz != 2 && sz != 3) continue;
        double x = m.mu[I];
        double warn_band = Tolerances{}.warn_factor * eps;
        if (eps > 0.0 && std::abs(x) < eps) {
            c.m23[I] = 0.0;
        } else {
            c.m23[I] = x;
            if (eps > 0.0 && std::abs(x) < warn_band)
                c.warnings.push_back("borderline moment |μ_" + format_blocks({I}) +
                                     "| = " + std::to_string(std::abs(x)) +
                                     " just above the zero tolerance");
        }
    }
    return c;
}

std::vector<Edge> isolated_edges(const TreeTopology& t, const CovarianceSummary& c) {
    if (t.leaf_count() != c.n) throw InputError("summary and tree disagree on n");
    std::set<Edge> active;
    for (int i = 1; i <= c.n; ++i)
        for (int j = i + 1; j <= c.n; ++j) {
            if (c.pair(i, j) == 0.0) continue;
            for (const Edge& e : path_edges(t, t.leaf_node(i), t.leaf_node(j)))
                active.insert(e);
        }
    std::vector<Edge> isolated;
    for (const Edge& e : t.edges())
        if (!active.count(e)) isolated.push_back(e);
    return isolated;
}

namespace {

NodeId shared_node(const Edge& a, const Edge& b) {
    if (b.incident(a.u)) return a.u;
    if (b.incident(a.v)) return a.v;
    return -1;
}

// order a class's edges consecutively along the path they form
std::vector<Edge> order_as_path(const std::vector<Edge>& cls) {
    if (cls.size() <= 1) return cls;
    std::map<NodeId, std::vector<int>> at;
    for (size_t i = 0; i < cls.size(); ++i) {
        at[cls[i].u].push_back(int(i));
        at[cls[i].v].push_back(int(i));
    }
    NodeId start = -1;
    for (auto& [v, ids] : at)
        if (ids.size() == 1) { start = v; break; } // smallest endpoint id
    if (start == -1) throw InternalError("active class is not a path");
    std::vector<Edge> ordered;
    std::vector<char> used(cls.size(), 0);
    NodeId cur = start;
    for (size_t step = 0; step < cls.size(); ++step) {
        int next = -1;
        for (int i : at[cur])
            if (!used[i]) { next = i; break; }
        if (next == -1) throw InternalError("active class is not a path");
        used[next] = 1;
        ordered.push_back(cls[next]);
        cur = cls[next].other(cur);
    }
    return ordered;
}

} // namespace

EdgeClasses edge_classes(const TreeTopology& t, const std::vector<Edge>& isolated) {
    std::set<Edge> iso(isolated.begin(), isolated.end());
    const auto& all = t.edges();
    int m = int(all.size());
    std::vector<int> rep(m);
    for (int i = 0; i < m; ++i) rep[i] = i;
    std::function<int(int)> find = [&](int x) {
        while (rep[x] != x) x = rep[x] = rep[rep[x]];
        return x;
    };

    auto related = [&](const Edge& a, const Edge& b) {
        NodeId s = shared_node(a, b);
        if (s == -1) return false;
        for (NodeId w : t.neighbors(s)) {
            Edge other(s, w);
            if (other == a || other == b) continue;
            if (!iso.count(other)) return false;
        }
        return true;
    };

    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            if (iso.count(all[i]) != iso.count(all[j])) continue;
            if (related(all[i], all[j])) {
                int a = find(i), b = find(j);
                if (a != b) rep[std::max(a, b)] = std::min(a, b);
            }
        }

    std::map<int, std::vector<Edge>> groups;
    for (int i = 0; i < m; ++i) groups[find(i)].push_back(all[i]);
    EdgeClasses out;
    for (auto& [root, cls] : groups) {
        if (iso.count(all[root]))
            out.isolated.push_back(cls); // connected subgraph, keep sorted
        else
            out.active.push_back(order_as_path(cls));
    }
    return out;
}

std::pair<Forest, std::vector<NodeId>> p_forest_and_degenerates(
    const TreeTopology& t, const std::vector<Edge>& isolated) {
    Forest f = remove_edges(t, isolated);
    std::vector<NodeId> degenerate;
    for (NodeId v = 0; v < t.node_count(); ++v)
        if (t.is_inner(v) && f.degree[v] < 2) degenerate.push_back(v);
    return {f, degenerate};
}

FiberReport classify_fiber(const TreeTopology& t, const CovarianceSummary& c) {
    for (int i = 1; i <= c.n; ++i)
        if (std::abs(c.mu_bar_leaf[i - 1]) >= 1.0)
            throw InputError("degenerate margin at leaf " + std::to_string(i));

    FiberReport rep;
    rep.warnings = c.warnings;
    rep.isolated = isolated_edges(t, c);
    auto [forest, degen] = p_forest_and_degenerates(t, rep.isolated);
    rep.forest = forest;
    rep.degenerate_nodes = degen;
    rep.classes = edge_classes(t, rep.isolated);

    if (!degen.empty()) {
        rep.classification = FiberClass::Singular;
        rep.deepest = deepest_singularity(t, rep.isolated, degen, c);
        return rep;
    }
    int l2 = 0;
    bool all_three = true;
    for (NodeId v = 0; v < t.node_count(); ++v) {
        if (!t.is_inner(v)) continue;
        if (forest.degree[v] == 2) { ++l2; all_three = false; }
    }
    if (all_three) {
        rep.classification = FiberClass::FiniteSmooth;
        rep.count = 1LL << (t.node_count() - t.leaf_count());
    } else {
        rep.classification = FiberClass::ManifoldWithCorners;
        rep.dimension = 2 * l2;
    }
    return rep;
}

TripodSquares recover_tripod(const CovarianceSummary& c, int i, int j, int k) {
    double mij = c.pair(i, j), mik = c.pair(i, k), mjk = c.pair(j, k);
    double prod = mij * mik * mjk;
    if (prod == 0.0)
        throw InputError("tripod recovery needs μ̂_ij μ̂_ik μ̂_jk != 0");
    if (prod < 0.0)
        throw OffModelError("μ̂_ij μ̂_ik μ̂_jk < 0: data outside the model");
    double m3 = c.triple(i, j, k);
    double d = m3 * m3 + 4.0 * prod;
    TripodSquares out;
    out.mu_bar_h_sq = m3 * m3 / d;
    out.eta_i_sq = d / (mjk * mjk);
    out.eta_j_sq = d / (mik * mik);
    out.eta_k_sq = d / (mij * mij);
    return out;
}

namespace {

// adjacency view of the p̂-forest
struct HatView {
    const TreeTopology* t = nullptr;
    std::vector<std::vector<NodeId>> adj;

    static HatView make(const TreeTopology& t, const Forest& f) {
        HatView h;
        h.t = &t;
        h.adj.assign(t.node_count(), {});
        for (const Edge& e : f.edges) {
            h.adj[e.u].push_back(e.v);
            h.adj[e.v].push_back(e.u);
        }
        for (auto& nb : h.adj) std::sort(nb.begin(), nb.end());
        return h;
    }

    // leaf labels reachable from `start` without stepping back to `from`
    std::vector<int> leaves_through(NodeId from, NodeId start) const {
        std::vector<int> leaves;
        std::vector<NodeId> stack{start};
        std::set<NodeId> seen{from, start};
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            if (t->leaf_label(v) > 0 && t->degree(v) == 1) leaves.push_back(t->leaf_label(v));
            for (NodeId w : adj[v])
                if (!seen.count(w)) { seen.insert(w); stack.push_back(w); }
        }
        std::sort(leaves.begin(), leaves.end());
        return leaves;
    }

    // label -> index of the hub branch it lies in; -1 when unreachable
    std::vector<int> branch_of(NodeId hub, int n, NodeId skip_branch = -1) const {
        std::vector<int> branch(n + 1, -1);
        int id = 0;
        for (NodeId w : adj[hub]) {
            if (w == skip_branch) { continue; }
            for (int lab : leaves_through(hub, w)) branch[lab] = id;
            ++id;
        }
        return branch;
    }
};

struct TripleChoice {
    int i = 0, j = 0, k = 0;
    bool ok = false;
};

// admissible triples separated by `hub` in T̂, in lexicographic order;
// `fixed` pins the first coordinate when >= 0
std::vector<TripleChoice> admissible_triples(const HatView& hat, const CovarianceSummary& c,
                                             NodeId hub, int fixed, NodeId skip_branch,
                                             int limit) {
    int n = c.n;
    std::vector<int> branch = hat.branch_of(hub, n, skip_branch);
    std::vector<TripleChoice> out;
    auto admissible = [&](int a, int b, int d) {
        double p = c.pair(a, b) * c.pair(a, d) * c.pair(b, d);
        return p != 0.0;
    };
    if (fixed >= 0) {
        for (int j = 1; j <= n && int(out.size()) < limit; ++j) {
            if (j == fixed || branch[j] < 0) continue;
            for (int k = j + 1; k <= n && int(out.size()) < limit; ++k) {
                if (k == fixed || branch[k] < 0 || branch[k] == branch[j]) continue;
                if (admissible(fixed, j, k)) out.push_back({fixed, j, k, true});
            }
        }
        return out;
    }
    for (int i = 1; i <= n && int(out.size()) < limit; ++i) {
        if (branch[i] < 0) continue;
        for (int j = i + 1; j <= n && int(out.size()) < limit; ++j) {
            if (branch[j] < 0 || branch[j] == branch[i]) continue;
            for (int k = j + 1; k <= n && int(out.size()) < limit; ++k) {
                if (branch[k] < 0 || branch[k] == branch[i] || branch[k] == branch[j]) continue;
                if (admissible(i, j, k)) out.push_back({i, j, k, true});
            }
        }
    }
    return out;
}

void check_consistent(double a, double b, double tol, const std::string& what) {
    if (std::abs(a - b) > tol)
        throw OffModelError("inconsistent recovery across admissible choices for " + what +
                            ": " + std::to_string(a) + " vs " + std::to_string(b));
}

double node_mu_sq(const HatView& hat, const CovarianceSummary& c, NodeId hub,
                  double tol, const std::string& what) {
    auto triples = admissible_triples(hat, c, hub, -1, -1, 2);
    if (triples.empty())
        throw OffModelError("no admissible triple around " + what +
                            " (misclassification or off-model data)");
    auto val = [&](const TripleChoice& tc) {
        return recover_tripod(c, tc.i, tc.j, tc.k).mu_bar_h_sq;
    };
    double primary = val(triples[0]);
    if (triples.size() > 1) check_consistent(primary, val(triples[1]), tol, "μ̄² at " + what);
    return primary;
}

// η² of a terminal path: regression of leaf `leaf` on hub, squared
double terminal_eta_sq(const HatView& hat, const CovarianceSummary& c, NodeId hub,
                       NodeId toward, int leaf, double tol, const std::string& what) {
    auto triples = admissible_triples(hat, c, hub, leaf, toward, 2);
    if (triples.empty())
        throw OffModelError("no admissible triple for " + what);
    auto val = [&](const TripleChoice& tc) {
        double mjk = c.pair(tc.j, tc.k);
        double m3 = c.triple(tc.i, tc.j, tc.k);
        double num = m3 * m3 + 4.0 * c.pair(tc.i, tc.j) * c.pair(tc.i, tc.k) * mjk;
        return num / (mjk * mjk);
    };
    double primary = val(triples[0]);
    if (triples.size() > 1) check_consistent(primary, val(triples[1]), tol, "η² of " + what);
    return primary;
}

struct QuadChoice {
    int i, j, k, l;
};

// η² across an inner path (u..v): the four-leaf formula
double inner_eta_sq(const HatView& hat, const CovarianceSummary& c, NodeId u, NodeId toward_v,
                    NodeId v, NodeId toward_u, double tol, const std::string& what) {
    int n = c.n;
    std::vector<int> bu = hat.branch_of(u, n, toward_v);
    std::vector<int> bv = hat.branch_of(v, n, toward_u);
    std::vector<QuadChoice> found;
    auto val = [&](const QuadChoice& q) {
        double mij = c.pair(q.i, q.j), mik = c.pair(q.i, q.k), mjk = c.pair(q.j, q.k);
        double mil = c.pair(q.i, q.l), mkl = c.pair(q.k, q.l);
        double m_ijk = c.triple(q.i, q.j, q.k), m_ikl = c.triple(q.i, q.k, q.l);
        double num = m_ijk * m_ijk + 4.0 * mij * mik * mjk;
        double den = m_ikl * m_ikl + 4.0 * mik * mil * mkl;
        return (mil * mil) / (mij * mij) * num / den;
    };
    for (int i = 1; i <= n && found.size() < 2; ++i) {
        if (bu[i] < 0) continue;
        for (int j = i + 1; j <= n && found.size() < 2; ++j) {
            if (bu[j] < 0 || bu[j] == bu[i]) continue;
            for (int k = 1; k <= n && found.size() < 2; ++k) {
                if (bv[k] < 0) continue;
                for (int l = k + 1; l <= n && found.size() < 2; ++l) {
                    if (bv[l] < 0 || bv[l] == bv[k]) continue;
                    QuadChoice q{i, j, k, l};
                    double mij = c.pair(i, j);
                    double m_ikl = c.triple(i, k, l);
                    double den = m_ikl * m_ikl +
                                 4.0 * c.pair(i, k) * c.pair(i, l) * c.pair(k, l);
                    if (mij == 0.0 || den == 0.0) continue;
                    found.push_back(q);
                }
            }
        }
    }
    if (found.empty()) throw OffModelError("no admissible quadruple for " + what);
    double primary = val(found[0]);
    if (found.size() > 1) check_consistent(primary, val(found[1]), tol, "η² of " + what);
    return primary;
}

} // namespace

RecoveredSquares recover_parameters(const TreeTopology& t, const CovarianceSummary& c,
                                    const FiberReport& shape, double consistency_tol) {
    if (shape.classification == FiberClass::Singular)
        throw InputError("recovery formulas need a finite or manifold fiber");

    RecoveredSquares out;
    out.leaf_mu_bar = c.mu_bar_leaf;
    HatView hat = HatView::make(t, shape.forest);

    for (NodeId v = 0; v < t.node_count(); ++v)
        if (t.is_inner(v) && shape.forest.degree[v] >= 3)
            out.node_mu_bar_sq[v] =
                node_mu_sq(hat, c, v, consistency_tol, t.node_ref(v));

    for (const Edge& e : shape.isolated) out.edge_eta_sq[e] = 0.0;

    for (const auto& cls : shape.classes.active) {
        // endpoints: the two nodes incident to exactly one class edge
        std::map<NodeId, int> deg;
        for (const Edge& e : cls) {
            deg[e.u]++;
            deg[e.v]++;
        }
        std::vector<NodeId> ends;
        for (auto& [v, d] : deg)
            if (d == 1) ends.push_back(v);
        if (cls.size() == 1) ends = {cls[0].u, cls[0].v};
        if (ends.size() != 2) throw InternalError("active class without two endpoints");
        // convention: rootward endpoint first (shallower in T; ties by id)
        NodeId u = ends[0], v = ends[1];
        if (t.rooted()) {
            if (std::make_pair(t.depth(v), v) < std::make_pair(t.depth(u), u)) std::swap(u, v);
        }
        // neighbor on the path, seen from each endpoint
        auto path_neighbor = [&](NodeId end) {
            for (const Edge& e : cls)
                if (e.incident(end)) return e.other(end);
            throw InternalError("endpoint not on its class");
        };
        NodeId un = path_neighbor(u), vn = path_neighbor(v);
        bool u_leaf = t.is_leaf(u), v_leaf = t.is_leaf(v);
        std::string what = "class (" + t.node_ref(u) + ".." + t.node_ref(v) + ")";

        // reported eta_sq is the squared regression of the leafward end on
        // the rootward end, mu_sq the squared covariance of the endpoints
        auto leaf_var = [&](NodeId leaf) {
            double mb = c.mu_bar_leaf[t.leaf_label(leaf) - 1];
            return (1.0 - mb * mb) / 4.0;
        };
        double eta_sq = 0.0, mu_sq = 0.0;
        if (u_leaf && v_leaf) {
            double muv = c.pair(t.leaf_label(u), t.leaf_label(v));
            if (muv == 0.0) throw InternalError("active class with zero endpoint covariance");
            double var_u = leaf_var(u);
            eta_sq = (muv * muv) / (var_u * var_u);
            mu_sq = muv * muv;
        } else if (u_leaf) {
            // the triple formula regresses on the hub v; convert
            double hub_eta = terminal_eta_sq(hat, c, v, vn, t.leaf_label(u), consistency_tol, what);
            double var_v = (1.0 - out.node_mu_bar_sq.at(v)) / 4.0;
            mu_sq = var_v * var_v * hub_eta;
            double var_u = leaf_var(u);
            eta_sq = mu_sq / (var_u * var_u);
        } else if (v_leaf) { // u is a hub: regression of the leaf v on u
            eta_sq = terminal_eta_sq(hat, c, u, un, t.leaf_label(v), consistency_tol, what);
            double var_u = (1.0 - out.node_mu_bar_sq.at(u)) / 4.0;
            mu_sq = var_u * var_u * eta_sq;
        } else {
            eta_sq = inner_eta_sq(hat, c, u, un, v, vn, consistency_tol, what);
            double var_u = (1.0 - out.node_mu_bar_sq.at(u)) / 4.0;
            mu_sq = var_u * var_u * eta_sq;
        }

        if (cls.size() == 1) {
            out.edge_eta_sq[cls[0]] = eta_sq;
        } else {
            PathClassInvariant inv;
            inv.edges = cls;
            inv.rootward = u;
            inv.leafward = v;
            inv.eta_sq = eta_sq;
            inv.mu_sq = mu_sq;
            out.path_classes.push_back(std::move(inv));
        }
    }
    return out;
}

OmegaParams local_sign_switch(const OmegaParams& omega, NodeId h) {
    const TreeTopology& t = omega.tree;
    t.check_node(h);
    if (t.is_leaf(h)) throw InputError("local sign switch needs an inner node");
    OmegaParams out = omega;
    out.mu_bar[h] = -out.mu_bar[h];
    if (h != t.root()) out.eta[h] = -out.eta[h];
    for (NodeId w : t.neighbors(h))
        if (w != t.parent(h)) out.eta[w] = -out.eta[w];
    return out;
}

std::vector<OmegaParams> enumerate_fiber(const OmegaParams& omega) {
    const TreeTopology& t = omega.tree;
    std::vector<NodeId> inner;
    for (NodeId v = 0; v < t.node_count(); ++v)
        if (t.is_inner(v)) inner.push_back(v);
    if (inner.size() > 20) throw InputError("fiber enumeration capped at 20 inner nodes");

    std::vector<OmegaParams> points;
    for (uint32_t mask = 0; mask < (uint32_t(1) << inner.size()); ++mask) {
        OmegaParams p = omega;
        for (size_t i = 0; i < inner.size(); ++i)
            if ((mask >> i) & 1) p = local_sign_switch(p, inner[i]);
        bool dup = false;
        for (const auto& q : points)
            if (q.mu_bar == p.mu_bar && q.eta == p.eta) { dup = true; break; }
        if (!dup) points.push_back(std::move(p));
    }
    return points;
}

OmegaParams consistent_sign_assignment(const TreeTopology& t, const TreeCumulants& k,
                                       const RecoveredSquares& squares, double verify_tol) {
    if (!squares.path_classes.empty())
        throw InputError("sign assignment needs a finite fiber (no path classes)");
    int n = t.leaf_count();
    if (int(squares.leaf_mu_bar.size()) != n)
        throw InputError("recovered squares disagree with the tree");

    OmegaParams om = make_omega(t);
    for (int lab = 1; lab <= n; ++lab)
        om.mu_bar[t.leaf_node(lab)] = squares.leaf_mu_bar[lab - 1];

    // structural T̂ from the recovered zeros
    std::vector<Edge> iso;
    for (const auto& [e, sq] : squares.edge_eta_sq)
        if (sq == 0.0) iso.push_back(e);
    Forest forest = remove_edges(t, iso);
    HatView hat = HatView::make(t, forest);

    auto kappa_of = [&](std::vector<int> labs) {
        LeafMask m = 0;
        for (int lab : labs) m |= LeafMask(1) << (lab - 1);
        return k.kappa[m];
    };

    // leaf potentials per forest component, pinned at the smallest leaf
    std::vector<double> tau(n + 1, 1.0);
    for (const auto& comp : forest.components) {
        std::vector<int> leaves;
        for (NodeId v : comp)
            if (t.leaf_label(v) > 0) leaves.push_back(t.leaf_label(v));
        std::sort(leaves.begin(), leaves.end());
        if (leaves.size() < 2) continue;
        int ref = leaves[0];
        for (size_t i = 1; i < leaves.size(); ++i) {
            double kp = kappa_of({ref, leaves[i]});
            if (kp == 0.0)
                throw OffModelError("vanishing pair cumulant inside an active component");
            tau[leaves[i]] = kp > 0 ? 1.0 : -1.0;
        }
    }

    for (NodeId child = 0; child < t.node_count(); ++child) {
        if (t.rooted() && child == t.root()) continue;
        NodeId par = t.parent(child);
        Edge e(par, child);
        auto it = squares.edge_eta_sq.find(e);
        if (it == squares.edge_eta_sq.end())
            throw InputError("recovered squares miss edge (" + t.node_ref(par) + "," +
                             t.node_ref(child) + ")");
        double s = 1.0;
        if (t.is_leaf(par)) s *= tau[t.leaf_label(par)];
        if (t.is_leaf(child)) s *= tau[t.leaf_label(child)];
        om.eta[child] = s * std::sqrt(it->second);
    }

    // μ̄ at the hubs from triple cumulants and the already-fixed edge signs
    for (NodeId v = 0; v < t.node_count(); ++v) {
        if (!t.is_inner(v)) continue;
        auto it = squares.node_mu_bar_sq.find(v);
        if (it == squares.node_mu_bar_sq.end())
            throw InputError("recovered squares miss inner node " + t.node_ref(v));
        double mag = std::sqrt(it->second);
        // lexicographically smallest triple separated by v with pairwise
        // non-zero pair cumulants
        std::vector<int> branch = hat.branch_of(v, n);
        TripleChoice chosen;
        for (int i = 1; i <= n && !chosen.ok; ++i) {
            if (branch[i] < 0) continue;
            for (int j = i + 1; j <= n && !chosen.ok; ++j) {
                if (branch[j] < 0 || branch[j] == branch[i]) continue;
                for (int kk = j + 1; kk <= n && !chosen.ok; ++kk) {
                    if (branch[kk] < 0 || branch[kk] == branch[i] || branch[kk] == branch[j])
                        continue;
                    if (kappa_of({i, j}) != 0.0 && kappa_of({i, kk}) != 0.0 &&
                        kappa_of({j, kk}) != 0.0)
                        chosen = {i, j, kk, true};
                }
            }
        }
        if (!chosen.ok)
            throw OffModelError("no separated triple with non-zero pair cumulants at node " +
                                t.node_ref(v));
        double k3 = kappa_of({chosen.i, chosen.j, chosen.k});
        std::vector<NodeId> leaf_nodes{t.leaf_node(chosen.i), t.leaf_node(chosen.j),
                                       t.leaf_node(chosen.k)};
        Subtree sub = spanning_subtree(t, leaf_nodes);
        double sign_paths = 1.0;
        for (const Edge& e : sub.edges) {
            NodeId child = t.parent(e.v) == e.u ? e.v : e.u;
            sign_paths *= om.eta[child] >= 0 ? 1.0 : -1.0;
        }
        if (k3 == 0.0) {
            if (mag > verify_tol)
                throw OffModelError("triple cumulant vanishes but μ̄² > 0 at node " +
                                    t.node_ref(v));
            om.mu_bar[v] = 0.0;
        } else {
            om.mu_bar[v] = (k3 * sign_paths > 0 ? 1.0 : -1.0) * mag;
        }
    }

    TreeCumulants back = detail::psi_formula(om);
    for (size_t I = 0; I < k.kappa.size(); ++I)
        if (std::abs(back.kappa[I] - k.kappa[I]) > verify_tol)
            throw OffModelError("no consistent sign assignment reproduces the cumulants");
    return om;
}

DeepestSingularity deepest_singularity(const TreeTopology& t,
                                       const std::vector<Edge>& isolated,
                                       const std::vector<NodeId>& degenerates,
                                       const CovarianceSummary& c) {
    if (degenerates.empty())
        throw InputError("deepest singularity requires a singular classification");
    DeepestSingularity out;
    out.eta_zero_edges = isolated;
    out.mu_sq_one_nodes = degenerates;

    int nv = int(degenerates.size()), ne = int(isolated.size());
    if (nv + ne > 20)
        throw InputError("minimal pair enumeration capped at |V̂|+|Ê| <= 20");

    // per observed zero pair: the root of its path and the isolated edges on it
    struct ZeroPair {
        int r_idx = -1;      // index into degenerates, -1 when r(ij) not in V̂
        uint32_t iso_mask = 0;
    };
    auto edge_index = [&](const Edge& e) {
        for (int i = 0; i < ne; ++i)
            if (isolated[i] == e) return i;
        return -1;
    };
    auto degen_index = [&](NodeId v) {
        for (int i = 0; i < nv; ++i)
            if (degenerates[i] == v) return i;
        return -1;
    };
    std::vector<ZeroPair> zeros;
    for (int i = 1; i <= c.n; ++i)
        for (int j = i + 1; j <= c.n; ++j) {
            if (c.pair(i, j) != 0.0) continue;
            ZeroPair z;
            auto nodes = path_nodes(t, t.leaf_node(i), t.leaf_node(j));
            NodeId r = nodes[0];
            if (t.rooted())
                for (NodeId v : nodes)
                    if (t.depth(v) < t.depth(r)) r = v;
            z.r_idx = degen_index(r);
            for (const Edge& e : path_edges(t, t.leaf_node(i), t.leaf_node(j))) {
                int idx = edge_index(e);
                if (idx >= 0) z.iso_mask |= uint32_t(1) << idx;
            }
            zeros.push_back(z);
        }

    // μ_ij(ω) is forced to zero on Ω_{(V₀,E₀)} iff r(ij) ∈ V₀ or the path
    // meets E₀; coverage is monotone, so minimality = no single removal works
    auto covers = [&](uint32_t vmask, uint32_t emask) {
        for (const ZeroPair& z : zeros) {
            bool ok = (z.r_idx >= 0 && ((vmask >> z.r_idx) & 1)) || (z.iso_mask & emask);
            if (!ok) return false;
        }
        return true;
    };

    for (uint32_t vmask = 0; vmask < (uint32_t(1) << nv); ++vmask)
        for (uint32_t emask = 0; emask < (uint32_t(1) << ne); ++emask) {
            if (!covers(vmask, emask)) continue;
            bool minimal = true;
            for (int b = 0; b < nv && minimal; ++b)
                if ((vmask >> b) & 1)
                    if (covers(vmask ^ (uint32_t(1) << b), emask)) minimal = false;
            for (int b = 0; b < ne && minimal; ++b)
                if ((emask >> b) & 1)
                    if (covers(vmask, emask ^ (uint32_t(1) << b))) minimal = false;
            if (!minimal) continue;
            std::vector<NodeId> vs;
            std::vector<Edge> es;
            for (int b = 0; b < nv; ++b)
                if ((vmask >> b) & 1) vs.push_back(degenerates[b]);
            for (int b = 0; b < ne; ++b)
                if ((emask >> b) & 1) es.push_back(isolated[b]);
            out.minimal_pairs.emplace_back(std::move(vs), std::move(es));
        }
    return out;
}

FiberReport recover_fiber(const TreeTopology& t, const CentralMoments& m, double eps,
                          double consistency_tol) {
    CovarianceSummary c = covariance_summary(m, eps);
    FiberReport rep = classify_fiber(t, c);
    if (rep.classification == FiberClass::Singular) return rep;
    rep.recovered = recover_parameters(t, c, rep, consistency_tol);
    if (rep.classification == FiberClass::FiniteSmooth) {
        TreeCumulants k = mu_to_kappa(t, m);
        OmegaParams om = consistent_sign_assignment(t, k, *rep.recovered,
                                                    std::max(consistency_tol, 1e-8));
        rep.points = enumerate_fiber(om);
    }
    return rep;
}

} // namespace latree
