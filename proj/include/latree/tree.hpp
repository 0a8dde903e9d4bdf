#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace latree {

using NodeId = int;

// Undirected edge, stored with u < v so edges compare and hash cheaply.
struct Edge {
    NodeId u = -1;
    NodeId v = -1;

    Edge() = default;
    Edge(NodeId a, NodeId b) : u(a < b ? a : b), v(a < b ? b : a) {}

    bool incident(NodeId w) const { return w == u || w == v; }
    NodeId other(NodeId w) const { return w == u ? v : u; }

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct EdgeHash {
    size_t operator()(const Edge& e) const {
        return std::hash<uint64_t>()((uint64_t(uint32_t(e.u)) << 32) | uint32_t(e.v));
    }
};

// Leaf-labeled tree. Node ids are dense 0..node_count-1; leaves carry labels
// 1..n bijectively, inner nodes carry none. Rooting is metadata: the adjacency
// is undirected and the parent function is derived from the stored root.
// Instances are immutable after construction.
class TreeTopology {
public:
    TreeTopology() = default;

    // nodes 0..node_count-1; label_of_node[v] in 1..n for leaves, 0 otherwise.
    static TreeTopology build(int node_count,
                              const std::vector<Edge>& edges,
                              const std::vector<int>& label_of_node,
                              std::optional<NodeId> root,
                              std::vector<std::string> names = {});

    int node_count() const { return int(adj_.size()); }
    int leaf_count() const { return int(leaf_of_label_.size()) - 1; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<NodeId>& neighbors(NodeId v) const { return adj_.at(v); }
    int degree(NodeId v) const { return int(adj_.at(v).size()); }
    bool is_leaf(NodeId v) const { return degree(v) == 1; }
    bool is_inner(NodeId v) const { return degree(v) > 1; }

    // 0 when v carries no label.
    int leaf_label(NodeId v) const { return label_of_node_.at(v); }
    NodeId leaf_node(int label) const;

    bool rooted() const { return root_.has_value(); }
    NodeId root() const;
    // Parent under the stored root; -1 for the root itself.
    NodeId parent(NodeId v) const;
    int depth(NodeId v) const;
    std::vector<NodeId> children(NodeId v) const;

    const std::string& display_name(NodeId v) const { return names_.at(v); }
    // Stable textual handle: leaf label, display name, or "#id".
    std::string node_ref(NodeId v) const;
    std::optional<NodeId> resolve_ref(const std::string& ref) const;

    bool has_edge(NodeId u, NodeId v) const;
    void check_node(NodeId v) const;

private:
    std::vector<std::vector<NodeId>> adj_;
    std::vector<Edge> edges_;
    std::vector<int> label_of_node_;
    std::vector<NodeId> leaf_of_label_; // index 0 unused
    std::vector<std::string> names_;
    std::optional<NodeId> root_;
    std::vector<NodeId> parent_;
    std::vector<int> depth_;
};

// Forest obtained from a tree by deleting edges; keeps the parent tree's ids.
struct Forest {
    int node_count = 0;
    std::vector<Edge> edges;
    std::vector<int> component_of;            // node -> component index
    std::vector<std::vector<NodeId>> components;
    std::vector<int> degree;                  // within the forest

    bool same_component(NodeId a, NodeId b) const { return component_of[a] == component_of[b]; }
};

// Minimal subtree spanned on a node set, viewed inside the parent tree
// (same node ids). local_root is r(W) when the parent tree is rooted.
struct Subtree {
    std::vector<NodeId> nodes;  // sorted
    std::vector<Edge> edges;
    NodeId local_root = -1;
    std::unordered_map<NodeId, int> deg;

    bool contains(NodeId v) const { return deg.count(v) > 0; }
    int degree(NodeId v) const { return deg.at(v); }
};

// Newick text -> rooted tree. Leaf labels must be the positive integers 1..n
// exactly; inner labels become display names; branch lengths and [comments]
// are parsed and dropped.
TreeTopology parse_newick(const std::string& text);

// Canonical form: children emitted in ascending order of smallest reachable
// leaf label.
std::string to_newick(const TreeTopology& t);

Subtree spanning_subtree(const TreeTopology& t, const std::vector<NodeId>& w);

// T/E': contracts each edge in es, identifying its endpoints. Fails if a
// contraction would merge two labeled leaves.
TreeTopology contract_edges(const TreeTopology& t, const std::vector<Edge>& es);

TreeTopology suppress_degree_two(const TreeTopology& t);

// (T*, E') with all inner degrees of T* at most 3 and T*/E' = t. High-degree
// nodes are resolved by repeatedly splitting off the two incident subtrees
// with the smallest reachable leaf labels, so the result is deterministic.
std::pair<TreeTopology, std::vector<Edge>> trivalent_expansion(const TreeTopology& t);

// True iff every path from a node of a to a node of b meets c.
bool separates(const TreeTopology& t, const std::vector<NodeId>& a,
               const std::vector<NodeId>& b, const std::vector<NodeId>& c);

std::vector<Edge> path_edges(const TreeTopology& t, NodeId u, NodeId v);
std::vector<NodeId> path_nodes(const TreeTopology& t, NodeId u, NodeId v);

Forest remove_edges(const TreeTopology& t, const std::vector<Edge>& es);

// Leaf-labeled isomorphism (rooting ignored).
bool trees_isomorphic(const TreeTopology& a, const TreeTopology& b);

} // namespace latree
