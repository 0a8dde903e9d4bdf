#include "latree/json_io.hpp"

#include <cmath>
#include <cstdio>

#include "latree/error.hpp"

namespace latree {
namespace jsonio {

namespace {

OJson entries_json(const std::vector<double>& values, bool skip_small_masks) {
    OJson entries = OJson::object();
    for (size_t a = 0; a < values.size(); ++a) {
        if (skip_small_masks && mask_popcount(LeafMask(a)) < 2) continue;
        entries[std::to_string(a)] = values[a];
    }
    return entries;
}

std::vector<double> entries_from_json(const OJson& j, int n, bool allow_partial) {
    std::vector<double> values(size_t(1) << n, 0.0);
    if (!j.contains("entries") || !j["entries"].is_object())
        throw InputError("coordinate file misses the entries object");
    for (auto it = j["entries"].begin(); it != j["entries"].end(); ++it) {
        size_t mask;
        try {
            mask = std::stoull(it.key());
        } catch (...) {
            throw InputError("bad subset key '" + it.key() + "'");
        }
        if (mask >= values.size())
            throw InputError("subset key " + it.key() + " out of range for n = " +
                             std::to_string(n));
        values[mask] = it.value().get<double>();
    }
    if (!allow_partial) return values;
    return values;
}

int n_of(const OJson& j) {
    if (!j.contains("n")) throw InputError("coordinate file misses n");
    int n = j["n"].get<int>();
    if (n < 1 || n > kMaxDenseLeaves) throw InputError("n out of range");
    return n;
}

std::vector<double> means_of(const OJson& j, int n) {
    if (!j.contains("means")) throw InputError("coordinate file misses means");
    auto v = j["means"].get<std::vector<double>>();
    if (int(v.size()) != n) throw InputError("means length differs from n");
    return v;
}

} // namespace

OJson to_json(const ProbabilityTable& p) {
    OJson j;
    j["n"] = p.n;
    j["kind"] = "p";
    j["entries"] = entries_json(p.values, false);
    return j;
}

OJson to_json(const NoncentralMoments& l) {
    OJson j;
    j["n"] = l.n;
    j["kind"] = "lambda";
    j["entries"] = entries_json(l.values, false);
    return j;
}

OJson to_json(const CentralMoments& m) {
    OJson j;
    j["n"] = m.n;
    j["kind"] = "mu";
    j["means"] = m.means;
    j["entries"] = entries_json(m.mu, true);
    return j;
}

OJson to_json(const TreeCumulants& k) {
    OJson j;
    j["n"] = k.n;
    j["kind"] = "kappa";
    j["tree"] = to_newick(k.tree);
    j["means"] = k.means;
    j["entries"] = entries_json(k.kappa, true);
    return j;
}

OJson to_json(const CorrelationCoords& r) {
    OJson j;
    j["n"] = r.n;
    j["kind"] = "rho";
    j["rho_bar"] = r.rho_bar;
    j["entries"] = entries_json(r.rho, true);
    return j;
}

std::string coords_kind(const OJson& j) {
    if (!j.contains("kind")) throw InputError("coordinate file misses kind");
    return j["kind"].get<std::string>();
}

ProbabilityTable table_from_json(const OJson& j) {
    if (coords_kind(j) != "p") throw InputError("expected kind \"p\"");
    ProbabilityTable p;
    p.n = n_of(j);
    p.values = entries_from_json(j, p.n, false);
    return p;
}

NoncentralMoments lambda_from_json(const OJson& j) {
    if (coords_kind(j) != "lambda") throw InputError("expected kind \"lambda\"");
    NoncentralMoments l;
    l.n = n_of(j);
    l.values = entries_from_json(j, l.n, false);
    return l;
}

CentralMoments mu_from_json(const OJson& j) {
    if (coords_kind(j) != "mu") throw InputError("expected kind \"mu\"");
    CentralMoments m;
    m.n = n_of(j);
    m.means = means_of(j, m.n);
    m.mu = entries_from_json(j, m.n, true);
    m.mu[0] = 1.0;
    return m;
}

TreeCumulants kappa_from_json(const OJson& j, const TreeTopology* tree_override) {
    if (coords_kind(j) != "kappa") throw InputError("expected kind \"kappa\"");
    TreeCumulants k;
    k.n = n_of(j);
    if (tree_override) {
        k.tree = *tree_override;
    } else if (j.contains("tree")) {
        k.tree = parse_newick(j["tree"].get<std::string>());
    } else {
        throw InputError("kappa file needs its defining tree");
    }
    if (k.tree.leaf_count() != k.n) throw InputError("tree and n disagree");
    k.means = means_of(j, k.n);
    k.kappa = entries_from_json(j, k.n, true);
    return k;
}

// ---------------------------------------------------------------------------
// parameter files

namespace {

OJson edge_entry(const TreeTopology& t, NodeId child, std::vector<double> values) {
    OJson e;
    e["u"] = t.node_ref(t.parent(child));
    e["v"] = t.node_ref(child);
    e["values"] = values;
    return e;
}

NodeId resolve(const TreeTopology& t, const OJson& ref, const char* what) {
    std::string s = ref.is_string() ? ref.get<std::string>() : ref.dump();
    auto v = t.resolve_ref(s);
    if (!v) throw InputError(std::string(what) + " reference '" + s + "' not in tree");
    return *v;
}

} // namespace

OJson to_json(const ThetaParams& th) {
    const TreeTopology& t = th.tree;
    OJson j;
    j["tree"] = to_newick(t);
    j["chart"] = "theta";
    j["root_p1"] = th.root_p1;
    OJson edges = OJson::array();
    for (NodeId v = 0; v < t.node_count(); ++v)
        if (v != t.root())
            edges.push_back(edge_entry(t, v, {th.cond_1g0[v], th.cond_1g1[v]}));
    j["edges"] = edges;
    return j;
}

OJson to_json(const OmegaParams& om) {
    const TreeTopology& t = om.tree;
    OJson j;
    j["tree"] = to_newick(t);
    j["chart"] = "omega";
    OJson nodes = OJson::array();
    for (NodeId v = 0; v < t.node_count(); ++v) {
        OJson e;
        e["v"] = t.node_ref(v);
        e["value"] = om.mu_bar[v];
        nodes.push_back(e);
    }
    j["nodes"] = nodes;
    OJson edges = OJson::array();
    for (NodeId v = 0; v < t.node_count(); ++v)
        if (v != t.root()) edges.push_back(edge_entry(t, v, {om.eta[v]}));
    j["edges"] = edges;
    return j;
}

OJson to_json(const RhoParams& rh) {
    const TreeTopology& t = rh.tree;
    OJson j;
    j["tree"] = to_newick(t);
    j["chart"] = "rho";
    OJson nodes = OJson::array();
    for (NodeId v = 0; v < t.node_count(); ++v) {
        OJson e;
        e["v"] = t.node_ref(v);
        e["value"] = rh.rho_bar[v];
        nodes.push_back(e);
    }
    j["nodes"] = nodes;
    OJson edges = OJson::array();
    for (NodeId v = 0; v < t.node_count(); ++v)
        if (v != t.root()) edges.push_back(edge_entry(t, v, {rh.rho_edge[v]}));
    j["edges"] = edges;
    return j;
}

OmegaParams LoadedParams::as_omega() const {
    if (chart == "omega") return omega;
    if (chart == "theta") return theta_to_omega(theta);
    return rho_to_omega(rho);
}

ThetaParams LoadedParams::as_theta() const {
    if (chart == "theta") return theta;
    return omega_to_theta(as_omega());
}

LoadedParams params_from_json(const OJson& j, const TreeTopology* tree_override) {
    LoadedParams out;
    TreeTopology t;
    if (tree_override) {
        t = *tree_override;
    } else if (j.contains("tree")) {
        t = parse_newick(j["tree"].get<std::string>());
    } else {
        throw InputError("parameter file misses the tree");
    }
    if (!j.contains("chart")) throw InputError("parameter file misses the chart");
    out.chart = j["chart"].get<std::string>();
    if (out.chart != "theta" && out.chart != "omega" && out.chart != "rho")
        throw InputError("chart must be theta, omega or rho");

    auto load_edges = [&](int expect_values, auto&& sink) {
        if (!j.contains("edges") || !j["edges"].is_array())
            throw InputError("parameter file misses the edges array");
        std::vector<char> seen(t.node_count(), 0);
        for (const auto& e : j["edges"]) {
            NodeId u = resolve(t, e.at("u"), "edge parent");
            NodeId v = resolve(t, e.at("v"), "edge child");
            if (t.parent(v) != u)
                throw InputError("edge (" + t.node_ref(u) + "," + t.node_ref(v) +
                                 ") is not parent->child under the stated root");
            auto vals = e.at("values").get<std::vector<double>>();
            if (int(vals.size()) != expect_values)
                throw InputError("edge (" + t.node_ref(u) + "," + t.node_ref(v) +
                                 ") needs " + std::to_string(expect_values) + " value(s)");
            if (seen[v]) throw InputError("duplicate edge for child " + t.node_ref(v));
            seen[v] = 1;
            sink(v, vals);
        }
        for (NodeId v = 0; v < t.node_count(); ++v)
            if (v != t.root() && !seen[v])
                throw InputError("missing edge for child " + t.node_ref(v));
    };
    auto load_nodes = [&](auto&& sink) {
        if (!j.contains("nodes") || !j["nodes"].is_array())
            throw InputError("parameter file misses the nodes array");
        std::vector<char> seen(t.node_count(), 0);
        for (const auto& e : j["nodes"]) {
            NodeId v = resolve(t, e.at("v"), "node");
            if (seen[v]) throw InputError("duplicate node " + t.node_ref(v));
            seen[v] = 1;
            sink(v, e.at("value").get<double>());
        }
        for (NodeId v = 0; v < t.node_count(); ++v)
            if (!seen[v]) throw InputError("missing node value for " + t.node_ref(v));
    };

    if (out.chart == "theta") {
        out.theta = make_theta(t);
        if (!j.contains("root_p1")) throw InputError("theta chart needs root_p1");
        out.theta.root_p1 = j["root_p1"].get<double>();
        load_edges(2, [&](NodeId v, const std::vector<double>& vals) {
            out.theta.cond_1g0[v] = vals[0];
            out.theta.cond_1g1[v] = vals[1];
        });
    } else if (out.chart == "omega") {
        out.omega = make_omega(t);
        load_nodes([&](NodeId v, double x) { out.omega.mu_bar[v] = x; });
        load_edges(1, [&](NodeId v, const std::vector<double>& vals) {
            out.omega.eta[v] = vals[0];
        });
    } else {
        out.rho.tree = t;
        out.rho.rho_bar.assign(t.node_count(), 0.0);
        out.rho.rho_edge.assign(t.node_count(), 0.0);
        load_nodes([&](NodeId v, double x) { out.rho.rho_bar[v] = x; });
        load_edges(1, [&](NodeId v, const std::vector<double>& vals) {
            out.rho.rho_edge[v] = vals[0];
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// fiber report

namespace {

OJson edge_ref(const TreeTopology& t, const Edge& e) {
    return OJson::array({t.node_ref(e.u), t.node_ref(e.v)});
}

OJson edge_list(const TreeTopology& t, const std::vector<Edge>& es) {
    OJson a = OJson::array();
    for (const Edge& e : es) a.push_back(edge_ref(t, e));
    return a;
}

} // namespace

OJson to_json(const TreeTopology& t, const FiberReport& rep) {
    OJson j;
    j["classification"] = to_string(rep.classification);
    if (rep.classification == FiberClass::FiniteSmooth) j["count"] = rep.count;
    if (rep.classification == FiberClass::ManifoldWithCorners) j["dimension"] = rep.dimension;
    j["isolated_edges"] = edge_list(t, rep.isolated);
    OJson degen = OJson::array();
    for (NodeId v : rep.degenerate_nodes) degen.push_back(t.node_ref(v));
    j["degenerate_nodes"] = degen;
    OJson comps = OJson::array();
    for (const auto& comp : rep.forest.components) {
        OJson c = OJson::array();
        for (NodeId v : comp) c.push_back(t.node_ref(v));
        comps.push_back(c);
    }
    j["forest_components"] = comps;
    OJson iso_cls = OJson::array();
    for (const auto& cls : rep.classes.isolated) iso_cls.push_back(edge_list(t, cls));
    j["classes_isolated"] = iso_cls;
    OJson act_cls = OJson::array();
    for (const auto& cls : rep.classes.active) act_cls.push_back(edge_list(t, cls));
    j["classes_active"] = act_cls;

    if (rep.recovered) {
        const RecoveredSquares& rs = *rep.recovered;
        OJson rec;
        OJson lm = OJson::object();
        for (size_t i = 0; i < rs.leaf_mu_bar.size(); ++i)
            lm[std::to_string(i + 1)] = rs.leaf_mu_bar[i];
        rec["leaf_mu_bar"] = lm;
        OJson nm = OJson::object();
        for (const auto& [v, sq] : rs.node_mu_bar_sq) nm[t.node_ref(v)] = sq;
        rec["node_mu_bar_sq"] = nm;
        OJson es = OJson::array();
        for (const auto& [e, sq] : rs.edge_eta_sq) {
            OJson o;
            o["u"] = t.node_ref(e.u);
            o["v"] = t.node_ref(e.v);
            o["value"] = sq;
            es.push_back(o);
        }
        rec["edge_eta_sq"] = es;
        OJson pcs = OJson::array();
        for (const auto& pc : rs.path_classes) {
            OJson o;
            o["edges"] = edge_list(t, pc.edges);
            o["rootward"] = t.node_ref(pc.rootward);
            o["leafward"] = t.node_ref(pc.leafward);
            o["eta_sq"] = pc.eta_sq;
            o["mu_sq"] = pc.mu_sq;
            pcs.push_back(o);
        }
        rec["path_classes"] = pcs;
        j["recovered"] = rec;
    }

    if (rep.deepest) {
        OJson d;
        d["eta_zero_edges"] = edge_list(t, rep.deepest->eta_zero_edges);
        OJson nodes = OJson::array();
        for (NodeId v : rep.deepest->mu_sq_one_nodes) nodes.push_back(t.node_ref(v));
        d["mu_sq_one_nodes"] = nodes;
        OJson pairs = OJson::array();
        for (const auto& [vs, es] : rep.deepest->minimal_pairs) {
            OJson p;
            OJson pv = OJson::array();
            for (NodeId v : vs) pv.push_back(t.node_ref(v));
            p["nodes"] = pv;
            p["edges"] = edge_list(t, es);
            pairs.push_back(p);
        }
        d["minimal_pairs"] = pairs;
        j["deepest_singularity"] = d;
    }

    if (!rep.points.empty()) {
        OJson pts = OJson::array(), thetas = OJson::array();
        for (const OmegaParams& om : rep.points) {
            pts.push_back(to_json(om));
            thetas.push_back(to_json(omega_to_theta(om)));
        }
        j["points"] = pts;
        j["theta_points"] = thetas;
    }
    j["warnings"] = rep.warnings;
    return j;
}

// ---------------------------------------------------------------------------
// CSV

std::string table_csv(const ProbabilityTable& p, const NoncentralMoments& l,
                      const TreeCumulants& k, int precision) {
    if (p.n != l.n || p.n != k.n) throw InputError("csv inputs disagree on n");
    int n = p.n;
    char buf[64];
    auto fmt = [&](double x) {
        // avoid "-0.0000" cells
        double r = x;
        std::snprintf(buf, sizeof buf, "%.*f", precision, r);
        std::string s = buf;
        bool all_zero = true;
        for (char ch : s)
            if (ch != '-' && ch != '.' && ch != '0') all_zero = false;
        if (all_zero && s[0] == '-') s.erase(0, 1);
        return s;
    };
    std::string out = "alpha,I,p,lambda,kappa\n";
    for (size_t row = 0; row < p.values.size(); ++row) {
        // rows count up with leaf 1 as the most significant digit
        LeafMask mask = 0;
        std::string alpha(n, '0');
        for (int i = 0; i < n; ++i)
            if ((row >> (n - 1 - i)) & 1) {
                alpha[i] = '1';
                mask |= LeafMask(1) << i;
            }
        std::string iname;
        for (int lab : mask_labels(mask)) {
            if (!iname.empty() && n > 9) iname += ' ';
            iname += std::to_string(lab);
        }
        double kv = mask_popcount(mask) >= 2 ? k.kappa[mask] : 0.0;
        out += alpha + "," + iname + "," + fmt(p.values[mask]) + "," +
               fmt(l.values[mask]) + "," + fmt(kv) + "\n";
    }
    return out;
}

} // namespace jsonio
} // namespace latree
