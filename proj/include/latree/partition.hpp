#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "latree/tree.hpp"

namespace latree {

// Subset of leaf labels as a bitmask, label i <-> bit i-1.
using LeafMask = uint32_t;

inline int mask_popcount(LeafMask m) { return __builtin_popcount(m); }
inline LeafMask full_mask(int n) { return n >= 32 ? ~LeafMask(0) : ((LeafMask(1) << n) - 1); }

std::vector<int> mask_labels(LeafMask m);
std::string format_blocks(const std::vector<LeafMask>& blocks);

// Partition of a leaf set induced by removing edges of T(I), together with
// the maximal removal set producing it (over the poset's E(I) indexing).
struct EdgePartition {
    std::vector<LeafMask> blocks;   // sorted by lowest label
    uint32_t removed_max = 0;       // Ē_π

    int block_count() const { return int(blocks.size()); }
    friend bool operator==(const EdgePartition& a, const EdgePartition& b) {
        return a.blocks == b.blocks;
    }
};

// The lattice Π_{T(I)} of all edge partitions of I, with the order
// π ≤ ν iff Ē_π ⊇ Ē_ν, lattice operations and memoized Möbius values.
// Built by exhaustive enumeration of edge subsets of T(I); frozen afterwards.
class EdgePartitionPoset {
public:
    static constexpr int kMaxSubtreeEdges = 20;

    static EdgePartitionPoset build(const TreeTopology& t, LeafMask leaf_set);

    int size() const { return int(elements_.size()); }
    const EdgePartition& element(int i) const { return elements_.at(i); }
    int top() const { return top_; }       // [I], nothing removed
    int bottom() const { return bottom_; } // all singletons, everything removed
    LeafMask leaf_set() const { return leaf_set_; }
    const std::vector<Edge>& subtree_edges() const { return sub_edges_; }

    bool leq(int p, int q) const; // p ≤ q
    int meet(int p, int q) const; // removes Ē_p ∪ Ē_q
    int join(int p, int q) const; // removes Ē_p ∩ Ē_q

    // Möbius value by the defining recursion m(p,p)=1,
    // m(p,q) = -Σ_{p ≤ δ < q} m(p,δ); 0 when p ≰ q. Memoized; safe for
    // concurrent callers.
    long long mobius(int p, int q) const;

    // The column m(·, 1̂), precomputed at build time in one O(P²) sweep.
    const std::vector<long long>& mobius_to_top() const { return col_top_; }

    // Index of the element with these blocks; throws if not an element.
    int index_of(const std::vector<LeafMask>& blocks) const;
    bool is_element(const std::vector<LeafMask>& blocks) const;

    std::string format_element(int i) const { return format_blocks(elements_[i].blocks); }

    // One cover relation per line: "<pi> < <nu>".
    std::string hasse_dump() const;

private:
    LeafMask leaf_set_ = 0;
    std::vector<Edge> sub_edges_;
    std::vector<EdgePartition> elements_;
    std::unordered_map<std::string, int> index_;
    int top_ = -1;
    int bottom_ = -1;
    std::vector<long long> col_top_;
    std::shared_ptr<const struct PosetCore> core_;
    std::shared_ptr<struct MobiusCache> cache_;
};

// Ordinary set partition of a leaf set.
struct SetPartition {
    std::vector<LeafMask> blocks; // sorted by lowest label

    int block_count() const { return int(blocks.size()); }
};

// π induced on I by removing `removed` from T(I), with Ē computed by
// maximality closure.
EdgePartition induced_partition(const TreeTopology& t, LeafMask leaf_set,
                                const std::vector<Edge>& removed);

EdgePartitionPoset build_poset(const TreeTopology& t, LeafMask leaf_set);

// m_{Π(I)}(π, 1̂) = (-1)^{|π|-1} (|π|-1)!
long long classical_mobius_top(const SetPartition& p);

// All Bell(|I|) partitions, |I| <= 10, deterministic order.
std::vector<SetPartition> enumerate_set_partitions(LeafMask leaf_set);

} // namespace latree
