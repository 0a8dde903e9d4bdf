#include "latree/tree.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <functional>
#include <map>
#include <set>

#include "latree/error.hpp"

namespace latree {

TreeTopology TreeTopology::build(int node_count,
                                 const std::vector<Edge>& edges,
                                 const std::vector<int>& label_of_node,
                                 std::optional<NodeId> root,
                                 std::vector<std::string> names) {
    if (node_count <= 0) throw InputError("tree must have at least one node");
    if (int(label_of_node.size()) != node_count)
        throw InternalError("label_of_node size mismatch");
    if (int(edges.size()) != node_count - 1)
        throw InputError("tree needs |edges| = |nodes| - 1");

    TreeTopology t;
    t.adj_.assign(node_count, {});
    t.label_of_node_ = label_of_node;
    t.names_ = names.empty() ? std::vector<std::string>(node_count) : std::move(names);
    if (int(t.names_.size()) != node_count) throw InternalError("names size mismatch");

    for (const Edge& e : edges) {
        if (e.u < 0 || e.v >= node_count || e.u == e.v)
            throw InputError("edge endpoint out of range");
        t.adj_[e.u].push_back(e.v);
        t.adj_[e.v].push_back(e.u);
    }
    for (auto& nb : t.adj_) std::sort(nb.begin(), nb.end());
    t.edges_ = edges;
    std::sort(t.edges_.begin(), t.edges_.end());

    // connectivity (acyclicity then follows from the edge count)
    std::vector<char> seen(node_count, 0);
    std::deque<NodeId> q{0};
    seen[0] = 1;
    int reached = 1;
    while (!q.empty()) {
        NodeId v = q.front();
        q.pop_front();
        for (NodeId w : t.adj_[v])
            if (!seen[w]) { seen[w] = 1; ++reached; q.push_back(w); }
    }
    if (reached != node_count) throw InputError("tree is not connected");

    // leaf labels form 1..n on the degree-1 nodes exactly
    int n = 0;
    for (NodeId v = 0; v < node_count; ++v)
        if (t.degree(v) == 1) ++n;
    if (node_count == 1) n = 1;
    t.leaf_of_label_.assign(n + 1, -1);
    for (NodeId v = 0; v < node_count; ++v) {
        int lab = label_of_node[v];
        if (t.degree(v) <= 1 && node_count > 1) {
            if (lab < 1 || lab > n)
                throw InputError("leaf node " + std::to_string(v) +
                                 " needs a label in 1.." + std::to_string(n));
            if (t.leaf_of_label_[lab] != -1)
                throw InputError("duplicate leaf label " + std::to_string(lab));
            t.leaf_of_label_[lab] = v;
        } else if (lab != 0) {
            throw InputError("inner node carries leaf label " + std::to_string(lab));
        }
    }

    if (root) {
        if (*root < 0 || *root >= node_count) throw InputError("root out of range");
        t.root_ = root;
        t.parent_.assign(node_count, -1);
        t.depth_.assign(node_count, 0);
        std::deque<NodeId> bfs{*root};
        std::vector<char> vis(node_count, 0);
        vis[*root] = 1;
        while (!bfs.empty()) {
            NodeId v = bfs.front();
            bfs.pop_front();
            for (NodeId w : t.adj_[v])
                if (!vis[w]) {
                    vis[w] = 1;
                    t.parent_[w] = v;
                    t.depth_[w] = t.depth_[v] + 1;
                    bfs.push_back(w);
                }
        }
    }
    return t;
}

NodeId TreeTopology::leaf_node(int label) const {
    if (label < 1 || label >= int(leaf_of_label_.size()))
        throw InputError("unknown leaf label " + std::to_string(label));
    return leaf_of_label_[label];
}

NodeId TreeTopology::root() const {
    if (!root_) throw InputError("tree is not rooted");
    return *root_;
}

NodeId TreeTopology::parent(NodeId v) const {
    check_node(v);
    if (!root_) throw InputError("tree is not rooted");
    return parent_[v];
}

int TreeTopology::depth(NodeId v) const {
    check_node(v);
    if (!root_) throw InputError("tree is not rooted");
    return depth_[v];
}

std::vector<NodeId> TreeTopology::children(NodeId v) const {
    check_node(v);
    std::vector<NodeId> out;
    for (NodeId w : adj_[v])
        if (w != parent(v)) out.push_back(w);
    return out;
}

std::string TreeTopology::node_ref(NodeId v) const {
    check_node(v);
    if (label_of_node_[v] > 0) return std::to_string(label_of_node_[v]);
    if (!names_[v].empty()) return names_[v];
    return "#" + std::to_string(v);
}

std::optional<NodeId> TreeTopology::resolve_ref(const std::string& ref) const {
    if (ref.empty()) return std::nullopt;
    if (ref[0] == '#') {
        try {
            NodeId v = std::stoi(ref.substr(1));
            if (v >= 0 && v < node_count()) return v;
        } catch (...) {}
        return std::nullopt;
    }
    bool digits = std::all_of(ref.begin(), ref.end(), [](unsigned char c) { return std::isdigit(c); });
    if (digits) {
        int lab = std::stoi(ref);
        if (lab >= 1 && lab < int(leaf_of_label_.size())) return leaf_of_label_[lab];
        return std::nullopt;
    }
    std::optional<NodeId> hit;
    for (NodeId v = 0; v < node_count(); ++v)
        if (names_[v] == ref) {
            if (hit) throw InputError("ambiguous node name '" + ref + "'");
            hit = v;
        }
    return hit;
}

bool TreeTopology::has_edge(NodeId u, NodeId v) const {
    check_node(u);
    check_node(v);
    const auto& nb = adj_[u];
    return std::binary_search(nb.begin(), nb.end(), v);
}

void TreeTopology::check_node(NodeId v) const {
    if (v < 0 || v >= node_count())
        throw InputError("unknown node id " + std::to_string(v));
}

// ---------------------------------------------------------------------------
// Newick

namespace {

struct NewickParser {
    const std::string& s;
    size_t pos = 0;

    explicit NewickParser(const std::string& text) : s(text) {}

    [[noreturn]] void fail(const std::string& what) {
        throw InputError("newick syntax error at position " + std::to_string(pos) + ": " + what);
    }

    void skip_ws() {
        while (pos < s.size()) {
            if (std::isspace(static_cast<unsigned char>(s[pos]))) { ++pos; continue; }
            if (s[pos] == '[') { // comment, parsed and ignored
                size_t close = s.find(']', pos);
                if (close == std::string::npos) fail("unterminated comment");
                pos = close + 1;
                continue;
            }
            break;
        }
    }

    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }

    std::string read_label() {
        skip_ws();
        size_t start = pos;
        while (pos < s.size() && s[pos] != '(' && s[pos] != ')' && s[pos] != ',' &&
               s[pos] != ':' && s[pos] != ';' && s[pos] != '[' &&
               !std::isspace(static_cast<unsigned char>(s[pos])))
            ++pos;
        return s.substr(start, pos - start);
    }

    void skip_branch_length() {
        if (peek() == ':') {
            ++pos;
            skip_ws();
            size_t start = pos;
            while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) ||
                                      s[pos] == '.' || s[pos] == '-' || s[pos] == '+' ||
                                      s[pos] == 'e' || s[pos] == 'E'))
                ++pos;
            if (pos == start) fail("expected branch length after ':'");
        }
    }
};

struct RawNode {
    std::string label;
    std::vector<int> children;
};

int parse_clade(NewickParser& p, std::vector<RawNode>& nodes) {
    int me = int(nodes.size());
    nodes.emplace_back();
    if (p.peek() == '(') {
        ++p.pos;
        std::vector<int> kids;
        while (true) {
            kids.push_back(parse_clade(p, nodes));
            char c = p.peek();
            if (c == ',') { ++p.pos; continue; }
            if (c == ')') { ++p.pos; break; }
            p.fail("expected ',' or ')'");
        }
        nodes[me].children = kids;
        nodes[me].label = p.read_label();
    } else {
        nodes[me].label = p.read_label();
        if (nodes[me].label.empty()) p.fail("expected leaf label");
    }
    p.skip_branch_length();
    return me;
}

} // namespace

TreeTopology parse_newick(const std::string& text) {
    NewickParser p(text);
    std::vector<RawNode> raw;
    if (p.peek() == '\0') p.fail("empty input");
    int root = parse_clade(p, raw);
    if (p.peek() != ';') p.fail("expected trailing ';'");
    ++p.pos;
    if (p.peek() != '\0') p.fail("trailing characters after ';'");

    int node_count = int(raw.size());
    std::vector<Edge> edges;
    std::vector<int> labels(node_count, 0);
    std::vector<std::string> names(node_count);
    int n_leaves = 0;
    for (int v = 0; v < node_count; ++v) {
        for (int c : raw[v].children) edges.emplace_back(v, c);
        bool leaf = raw[v].children.empty();
        if (leaf) {
            const std::string& lab = raw[v].label;
            bool digits = !lab.empty() &&
                          std::all_of(lab.begin(), lab.end(),
                                      [](unsigned char c) { return std::isdigit(c); });
            if (!digits)
                throw InputError("leaf label '" + lab + "' is not a positive integer");
            labels[v] = std::stoi(lab);
            if (labels[v] < 1) throw InputError("leaf labels must be >= 1");
            ++n_leaves;
        } else {
            names[v] = raw[v].label;
        }
    }
    if (n_leaves < 2) throw InputError("need at least 2 leaves");
    for (int v = 0; v < node_count; ++v)
        if (raw[v].children.empty() && labels[v] > n_leaves)
            throw InputError("leaf labels must form 1..n exactly; got " +
                             std::to_string(labels[v]) + " with n = " + std::to_string(n_leaves));
    if (!raw[root].children.empty() && raw[root].children.size() == 1)
        throw InputError("root of degree one cannot be unlabeled");

    return TreeTopology::build(node_count, edges, labels, root, std::move(names));
}

namespace {

// smallest leaf label reachable from v without crossing back over 'from'
int min_label_through(const TreeTopology& t, NodeId from, NodeId v) {
    int best = t.leaf_label(v) > 0 ? t.leaf_label(v) : INT32_MAX;
    for (NodeId w : t.neighbors(v))
        if (w != from) best = std::min(best, min_label_through(t, v, w));
    return best;
}

void write_newick(const TreeTopology& t, NodeId from, NodeId v, std::string& out) {
    std::vector<NodeId> kids;
    for (NodeId w : t.neighbors(v))
        if (w != from) kids.push_back(w);
    if (kids.empty()) {
        out += std::to_string(t.leaf_label(v));
        return;
    }
    std::vector<std::pair<int, NodeId>> order;
    for (NodeId w : kids) order.emplace_back(min_label_through(t, v, w), w);
    std::sort(order.begin(), order.end());
    out += '(';
    for (size_t i = 0; i < order.size(); ++i) {
        if (i) out += ',';
        write_newick(t, v, order[i].second, out);
    }
    out += ')';
    out += t.display_name(v);
}

} // namespace

std::string to_newick(const TreeTopology& t) {
    std::string out;
    write_newick(t, -1, t.root(), out);
    out += ';';
    return out;
}

// ---------------------------------------------------------------------------
// Structural operations

std::vector<NodeId> path_nodes(const TreeTopology& t, NodeId u, NodeId v) {
    t.check_node(u);
    t.check_node(v);
    std::vector<NodeId> par(t.node_count(), -2);
    std::deque<NodeId> q{u};
    par[u] = -1;
    while (!q.empty()) {
        NodeId x = q.front();
        q.pop_front();
        if (x == v) break;
        for (NodeId w : t.neighbors(x))
            if (par[w] == -2) { par[w] = x; q.push_back(w); }
    }
    std::vector<NodeId> path;
    for (NodeId x = v; x != -1; x = par[x]) path.push_back(x);
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<Edge> path_edges(const TreeTopology& t, NodeId u, NodeId v) {
    if (u == v) throw InputError("path endpoints must differ");
    auto nodes = path_nodes(t, u, v);
    std::vector<Edge> out;
    for (size_t i = 0; i + 1 < nodes.size(); ++i) out.emplace_back(nodes[i], nodes[i + 1]);
    return out;
}

Subtree spanning_subtree(const TreeTopology& t, const std::vector<NodeId>& w) {
    if (w.empty()) throw InputError("spanning set must be non-empty");
    for (NodeId v : w) t.check_node(v);

    Subtree sub;
    std::set<NodeId> nodes;
    std::set<Edge> edges;
    nodes.insert(w[0]);
    for (size_t i = 1; i < w.size(); ++i) {
        auto path = path_nodes(t, w[0], w[i]);
        for (size_t k = 0; k < path.size(); ++k) {
            nodes.insert(path[k]);
            if (k) edges.insert(Edge(path[k - 1], path[k]));
        }
    }
    sub.nodes.assign(nodes.begin(), nodes.end());
    sub.edges.assign(edges.begin(), edges.end());
    for (NodeId v : sub.nodes) sub.deg[v] = 0;
    for (const Edge& e : sub.edges) {
        sub.deg[e.u]++;
        sub.deg[e.v]++;
    }
    if (t.rooted()) {
        // r(W): the unique node whose parent lies outside the subtree
        for (NodeId v : sub.nodes) {
            NodeId p = t.parent(v);
            if (p == -1 || !nodes.count(p)) {
                sub.local_root = v;
                break;
            }
        }
    }
    return sub;
}

TreeTopology contract_edges(const TreeTopology& t, const std::vector<Edge>& es) {
    for (const Edge& e : es)
        if (!t.has_edge(e.u, e.v)) throw InputError("contracted edge not in tree");

    int nc = t.node_count();
    std::vector<int> rep(nc);
    for (int i = 0; i < nc; ++i) rep[i] = i;
    std::function<int(int)> find = [&](int x) {
        while (rep[x] != x) x = rep[x] = rep[rep[x]];
        return x;
    };
    for (const Edge& e : es) {
        int a = find(e.u), b = find(e.v);
        if (a != b) rep[std::max(a, b)] = std::min(a, b);
    }
    // merging two labeled leaves loses a label
    std::vector<int> label_of_class(nc, 0);
    for (int v = 0; v < nc; ++v)
        if (t.leaf_label(v) > 0) {
            int c = find(v);
            if (label_of_class[c] != 0)
                throw InputError("contraction would merge two labeled leaves");
            label_of_class[c] = t.leaf_label(v);
        }

    std::vector<int> new_id(nc, -1);
    int next = 0;
    for (int v = 0; v < nc; ++v)
        if (find(v) == v) new_id[v] = next++;
    std::vector<Edge> new_edges;
    std::set<Edge> dedup;
    for (const Edge& e : t.edges()) {
        int a = find(e.u), b = find(e.v);
        if (a == b) continue;
        Edge ne(new_id[a], new_id[b]);
        if (dedup.insert(ne).second) new_edges.push_back(ne);
    }
    std::vector<int> labels(next, 0);
    std::vector<std::string> names(next);
    for (int v = 0; v < nc; ++v) {
        int c = find(v);
        labels[new_id[c]] = label_of_class[c];
        if (names[new_id[c]].empty() && t.leaf_label(v) == 0)
            names[new_id[c]] = t.display_name(v);
    }
    std::optional<NodeId> root;
    if (t.rooted()) root = new_id[find(t.root())];
    return TreeTopology::build(next, new_edges, labels, root, std::move(names));
}

TreeTopology suppress_degree_two(const TreeTopology& t) {
    TreeTopology cur = t;
    while (true) {
        NodeId hit = -1;
        for (NodeId v = 0; v < cur.node_count(); ++v)
            if (cur.degree(v) == 2 && cur.leaf_label(v) == 0) { hit = v; break; }
        if (hit == -1) return cur;
        NodeId w = std::min(cur.neighbors(hit)[0], cur.neighbors(hit)[1]);
        cur = contract_edges(cur, {Edge(hit, w)});
    }
}

std::pair<TreeTopology, std::vector<Edge>> trivalent_expansion(const TreeTopology& t) {
    if (t.leaf_count() < 3) throw InputError("trivalent expansion needs >= 3 leaves");

    // mutable working copy
    int nc = t.node_count();
    std::vector<std::vector<NodeId>> adj(nc);
    for (const Edge& e : t.edges()) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    std::vector<int> labels(nc);
    std::vector<std::string> names(nc);
    for (int v = 0; v < nc; ++v) {
        labels[v] = t.leaf_label(v);
        names[v] = t.display_name(v);
    }
    // smallest leaf label reachable through each neighbor; recomputed lazily
    auto min_through = [&](NodeId from, NodeId start) {
        int best = INT32_MAX;
        std::deque<NodeId> q{start};
        std::vector<char> vis(adj.size(), 0);
        vis[start] = 1;
        vis[from] = 1;
        while (!q.empty()) {
            NodeId x = q.front();
            q.pop_front();
            if (labels[x] > 0) best = std::min(best, labels[x]);
            for (NodeId w : adj[x])
                if (!vis[w]) { vis[w] = 1; q.push_back(w); }
        }
        return best;
    };

    std::set<Edge> added;
    for (NodeId v = 0; v < int(adj.size()); ++v) {
        while (int(adj[v].size()) > 3) {
            std::vector<std::pair<int, NodeId>> order;
            for (NodeId w : adj[v]) order.emplace_back(min_through(v, w), w);
            std::sort(order.begin(), order.end());
            NodeId a = order[0].second, b = order[1].second;
            NodeId fresh = int(adj.size());
            adj.emplace_back();
            labels.push_back(0);
            names.emplace_back();
            auto detach = [&](NodeId x) {
                auto& nb = adj[v];
                nb.erase(std::find(nb.begin(), nb.end(), x));
                auto& back = adj[x];
                *std::find(back.begin(), back.end(), v) = fresh;
                adj[fresh].push_back(x);
                // a re-routed contraction edge stays a contraction edge
                if (added.erase(Edge(v, x))) added.insert(Edge(fresh, x));
            };
            detach(a);
            detach(b);
            adj[v].push_back(fresh);
            adj[fresh].push_back(v);
            added.insert(Edge(fresh, v));
        }
    }

    std::vector<Edge> edges;
    for (NodeId v = 0; v < int(adj.size()); ++v)
        for (NodeId w : adj[v])
            if (v < w) edges.emplace_back(v, w);
    std::optional<NodeId> root;
    if (t.rooted()) root = t.root();
    TreeTopology out = TreeTopology::build(int(adj.size()), edges, labels, root, std::move(names));
    return {out, std::vector<Edge>(added.begin(), added.end())};
}

bool separates(const TreeTopology& t, const std::vector<NodeId>& a,
               const std::vector<NodeId>& b, const std::vector<NodeId>& c) {
    std::vector<char> in_a(t.node_count(), 0), in_b(t.node_count(), 0), in_c(t.node_count(), 0);
    for (NodeId v : a) { t.check_node(v); in_a[v] = 1; }
    for (NodeId v : b) {
        t.check_node(v);
        if (in_a[v]) throw InputError("separation sets must be disjoint");
        in_b[v] = 1;
    }
    for (NodeId v : c) {
        t.check_node(v);
        if (in_a[v] || in_b[v]) throw InputError("separation sets must be disjoint");
        in_c[v] = 1;
    }
    // walk components of T - C; a and b must never share one
    std::vector<char> vis(t.node_count(), 0);
    for (NodeId s = 0; s < t.node_count(); ++s) {
        if (vis[s] || in_c[s]) continue;
        bool touch_a = false, touch_b = false;
        std::deque<NodeId> q{s};
        vis[s] = 1;
        while (!q.empty()) {
            NodeId v = q.front();
            q.pop_front();
            touch_a |= bool(in_a[v]);
            touch_b |= bool(in_b[v]);
            for (NodeId w : t.neighbors(v))
                if (!vis[w] && !in_c[w]) { vis[w] = 1; q.push_back(w); }
        }
        if (touch_a && touch_b) return false;
    }
    return true;
}

Forest remove_edges(const TreeTopology& t, const std::vector<Edge>& es) {
    std::set<Edge> gone(es.begin(), es.end());
    for (const Edge& e : es)
        if (!t.has_edge(e.u, e.v)) throw InputError("removed edge not in tree");

    Forest f;
    f.node_count = t.node_count();
    f.degree.assign(f.node_count, 0);
    for (const Edge& e : t.edges())
        if (!gone.count(e)) {
            f.edges.push_back(e);
            f.degree[e.u]++;
            f.degree[e.v]++;
        }
    f.component_of.assign(f.node_count, -1);
    std::vector<std::vector<NodeId>> adj(f.node_count);
    for (const Edge& e : f.edges) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    for (NodeId s = 0; s < f.node_count; ++s) {
        if (f.component_of[s] != -1) continue;
        int comp = int(f.components.size());
        f.components.emplace_back();
        std::deque<NodeId> q{s};
        f.component_of[s] = comp;
        while (!q.empty()) {
            NodeId v = q.front();
            q.pop_front();
            f.components[comp].push_back(v);
            for (NodeId w : adj[v])
                if (f.component_of[w] == -1) { f.component_of[w] = comp; q.push_back(w); }
        }
        std::sort(f.components[comp].begin(), f.components[comp].end());
    }
    return f;
}

namespace {

std::string canon_string(const TreeTopology& t, NodeId from, NodeId v) {
    if (t.leaf_label(v) > 0 && t.degree(v) == 1)
        return std::to_string(t.leaf_label(v));
    std::vector<std::string> parts;
    for (NodeId w : t.neighbors(v))
        if (w != from) parts.push_back(canon_string(t, v, w));
    if (parts.empty()) return "()";
    std::sort(parts.begin(), parts.end());
    std::string out = "(";
    for (auto& p : parts) out += p + ",";
    out += ")";
    return out;
}

} // namespace

bool trees_isomorphic(const TreeTopology& a, const TreeTopology& b) {
    if (a.node_count() != b.node_count() || a.leaf_count() != b.leaf_count()) return false;
    // hang both trees off leaf 1 and compare canonical forms of the rest
    NodeId la = a.leaf_node(1), lb = b.leaf_node(1);
    if (a.node_count() == 1) return true;
    return canon_string(a, la, a.neighbors(la)[0]) == canon_string(b, lb, b.neighbors(lb)[0]);
}

} // namespace latree
