#include "latree/partition.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>

#include "latree/error.hpp"

namespace latree {

std::vector<int> mask_labels(LeafMask m) {
    std::vector<int> out;
    for (int i = 0; m; ++i, m >>= 1)
        if (m & 1) out.push_back(i + 1);
    return out;
}

std::string format_blocks(const std::vector<LeafMask>& blocks) {
    int max_label = 0;
    for (LeafMask b : blocks)
        for (int lab : mask_labels(b)) max_label = std::max(max_label, lab);
    std::string out;
    for (size_t k = 0; k < blocks.size(); ++k) {
        if (k) out += '|';
        auto labs = mask_labels(blocks[k]);
        for (size_t i = 0; i < labs.size(); ++i) {
            if (i && max_label > 9) out += ',';
            out += std::to_string(labs[i]);
        }
    }
    return out;
}

namespace {

std::string blocks_key(const std::vector<LeafMask>& blocks) {
    std::string key;
    for (LeafMask b : blocks) key.append(reinterpret_cast<const char*>(&b), sizeof(b));
    return key;
}

std::vector<LeafMask> canonical_blocks(std::vector<LeafMask> blocks) {
    std::sort(blocks.begin(), blocks.end(),
              [](LeafMask a, LeafMask b) { return (a & -a) < (b & -b); });
    return blocks;
}

} // namespace

// Pair-path index of T(I): for each label pair, the set of E(I) edges on the
// connecting path, as a bitmask over the sorted edge list.
struct PosetCore {
    std::vector<Edge> edges;
    std::vector<int> labels;
    std::vector<uint32_t> pair_path;

    int pair_index(int a, int b) const {
        int k = int(labels.size());
        return a * k - a * (a + 1) / 2 + (b - a - 1);
    }

    static PosetCore make(const TreeTopology& t, LeafMask leaf_set) {
        PosetCore c;
        c.labels = mask_labels(leaf_set);
        if (int(c.labels.size()) < 2) throw InputError("poset needs |I| >= 2");
        std::vector<NodeId> leaf_nodes;
        for (int lab : c.labels) leaf_nodes.push_back(t.leaf_node(lab));
        Subtree sub = spanning_subtree(t, leaf_nodes);
        c.edges = sub.edges;
        if (int(c.edges.size()) > EdgePartitionPoset::kMaxSubtreeEdges)
            throw InputError("edge partition enumeration cap exceeded: |E(I)| = " +
                             std::to_string(c.edges.size()));
        auto edge_idx = [&](const Edge& e) {
            return int(std::lower_bound(c.edges.begin(), c.edges.end(), e) - c.edges.begin());
        };
        int k = int(c.labels.size());
        c.pair_path.assign(size_t(k) * (k - 1) / 2, 0);
        for (int a = 0; a < k; ++a)
            for (int b = a + 1; b < k; ++b) {
                uint32_t m = 0;
                for (const Edge& e : path_edges(t, leaf_nodes[a], leaf_nodes[b]))
                    m |= uint32_t(1) << edge_idx(e);
                c.pair_path[c.pair_index(a, b)] = m;
            }
        return c;
    }

    // blocks under a removal set, with Ē as the complement of the union of
    // all within-block pair paths (the maximality closure)
    EdgePartition partition_of(uint32_t removed) const {
        int k = int(labels.size());
        std::vector<int> rep(k);
        for (int i = 0; i < k; ++i) rep[i] = i;
        auto find = [&](int x) {
            while (rep[x] != x) x = rep[x] = rep[rep[x]];
            return x;
        };
        for (int a = 0; a < k; ++a)
            for (int b = a + 1; b < k; ++b)
                if ((pair_path[pair_index(a, b)] & removed) == 0) {
                    int ra = find(a), rb = find(b);
                    if (ra != rb) rep[std::max(ra, rb)] = std::min(ra, rb);
                }
        std::vector<LeafMask> block_of(k, 0);
        for (int i = 0; i < k; ++i)
            block_of[find(i)] |= LeafMask(1) << (labels[i] - 1);
        EdgePartition part;
        for (int i = 0; i < k; ++i)
            if (block_of[i]) part.blocks.push_back(block_of[i]);
        part.blocks = canonical_blocks(std::move(part.blocks));

        uint32_t within = 0;
        for (int a = 0; a < k; ++a)
            for (int b = a + 1; b < k; ++b)
                if (find(a) == find(b)) within |= pair_path[pair_index(a, b)];
        uint32_t all = edges.size() >= 32 ? ~uint32_t(0)
                                          : ((uint32_t(1) << edges.size()) - 1);
        part.removed_max = all & ~within;
        return part;
    }
};

EdgePartition induced_partition(const TreeTopology& t, LeafMask leaf_set,
                                const std::vector<Edge>& removed) {
    PosetCore core = PosetCore::make(t, leaf_set);
    uint32_t rm = 0;
    for (const Edge& e : removed) {
        auto it = std::lower_bound(core.edges.begin(), core.edges.end(), e);
        if (it == core.edges.end() || !(*it == e))
            throw InputError("removed edge lies outside T(I)");
        rm |= uint32_t(1) << (it - core.edges.begin());
    }
    return core.partition_of(rm);
}

struct MobiusCache {
    std::mutex m;
    std::unordered_map<uint64_t, long long> memo;
};

EdgePartitionPoset EdgePartitionPoset::build(const TreeTopology& t, LeafMask leaf_set) {
    EdgePartitionPoset poset;
    poset.core_ = std::make_shared<PosetCore>(PosetCore::make(t, leaf_set));
    poset.cache_ = std::make_shared<MobiusCache>();
    const PosetCore& core = *poset.core_;
    poset.leaf_set_ = leaf_set;
    poset.sub_edges_ = core.edges;

    uint32_t limit = uint32_t(1) << core.edges.size();
    for (uint32_t s = 0; s < limit; ++s) {
        EdgePartition part = core.partition_of(s);
        std::string key = blocks_key(part.blocks);
        if (poset.index_.emplace(key, int(poset.elements_.size())).second)
            poset.elements_.push_back(std::move(part));
    }
    for (int i = 0; i < poset.size(); ++i) {
        if (poset.elements_[i].block_count() == 1) poset.top_ = i;
        if (poset.elements_[i].block_count() == int(core.labels.size())) poset.bottom_ = i;
    }
    if (poset.top_ < 0 || poset.bottom_ < 0)
        throw InternalError("edge partition poset misses top or bottom");

    // column m(·, 1̂) via the dual recursion m(π,1̂) = -Σ_{π < δ ≤ 1̂} m(δ,1̂),
    // swept from the top down
    int p = poset.size();
    std::vector<int> order(p);
    for (int i = 0; i < p; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return mask_popcount(poset.elements_[a].removed_max) <
               mask_popcount(poset.elements_[b].removed_max);
    });
    poset.col_top_.assign(p, 0);
    for (int oi = 0; oi < p; ++oi) {
        int i = order[oi];
        if (i == poset.top_) { poset.col_top_[i] = 1; continue; }
        long long sum = 0;
        for (int oj = 0; oj < oi; ++oj) {
            int j = order[oj];
            if (j != i && poset.leq(i, j)) sum += poset.col_top_[j];
        }
        poset.col_top_[i] = -sum;
    }
    return poset;
}

EdgePartitionPoset build_poset(const TreeTopology& t, LeafMask leaf_set) {
    return EdgePartitionPoset::build(t, leaf_set);
}

bool EdgePartitionPoset::leq(int p, int q) const {
    uint32_t rp = elements_.at(p).removed_max, rq = elements_.at(q).removed_max;
    return (rp & rq) == rq;
}

int EdgePartitionPoset::meet(int p, int q) const {
    uint32_t rm = elements_.at(p).removed_max | elements_.at(q).removed_max;
    return index_of(core_->partition_of(rm).blocks);
}

int EdgePartitionPoset::join(int p, int q) const {
    uint32_t rm = elements_.at(p).removed_max & elements_.at(q).removed_max;
    return index_of(core_->partition_of(rm).blocks);
}

long long EdgePartitionPoset::mobius(int p, int q) const {
    if (!leq(p, q)) return 0;
    if (p == q) return 1;
    uint64_t key = (uint64_t(uint32_t(p)) << 32) | uint32_t(q);
    {
        std::lock_guard<std::mutex> lock(cache_->m);
        auto it = cache_->memo.find(key);
        if (it != cache_->memo.end()) return it->second;
    }
    long long sum = 0;
    for (int d = 0; d < size(); ++d)
        if (d != q && leq(p, d) && leq(d, q)) sum += mobius(p, d);
    long long val = -sum;
    std::lock_guard<std::mutex> lock(cache_->m);
    cache_->memo.emplace(key, val);
    return val;
}

int EdgePartitionPoset::index_of(const std::vector<LeafMask>& blocks) const {
    auto it = index_.find(blocks_key(canonical_blocks(blocks)));
    if (it == index_.end())
        throw InputError("partition " + format_blocks(blocks) + " is not an element of this poset");
    return it->second;
}

bool EdgePartitionPoset::is_element(const std::vector<LeafMask>& blocks) const {
    return index_.count(blocks_key(canonical_blocks(blocks))) > 0;
}

std::string EdgePartitionPoset::hasse_dump() const {
    // covers: p < q with nothing strictly between
    std::ostringstream out;
    std::vector<std::pair<std::string, std::string>> lines;
    for (int p = 0; p < size(); ++p)
        for (int q = 0; q < size(); ++q) {
            if (p == q || !leq(p, q)) continue;
            bool cover = true;
            for (int d = 0; d < size() && cover; ++d)
                if (d != p && d != q && leq(p, d) && leq(d, q)) cover = false;
            if (cover) lines.emplace_back(format_element(p), format_element(q));
        }
    std::sort(lines.begin(), lines.end());
    for (auto& [lo, hi] : lines) out << lo << " < " << hi << "\n";
    return out.str();
}

long long classical_mobius_top(const SetPartition& p) {
    int k = p.block_count();
    long long fact = 1;
    for (int i = 2; i < k; ++i) fact *= i;
    return (k % 2 == 1 ? fact : -fact);
}

std::vector<SetPartition> enumerate_set_partitions(LeafMask leaf_set) {
    auto labels = mask_labels(leaf_set);
    int k = int(labels.size());
    if (k > 10) throw InputError("set partition enumeration capped at |I| <= 10");
    std::vector<SetPartition> out;
    // restricted growth strings, lexicographic
    std::vector<int> rgs(k, 0);
    while (true) {
        int nb = *std::max_element(rgs.begin(), rgs.end()) + 1;
        SetPartition sp;
        sp.blocks.assign(nb, 0);
        for (int i = 0; i < k; ++i) sp.blocks[rgs[i]] |= LeafMask(1) << (labels[i] - 1);
        out.push_back(std::move(sp));
        // next string
        int i = k - 1;
        for (; i > 0; --i) {
            int cap = *std::max_element(rgs.begin(), rgs.begin() + i) + 1;
            if (rgs[i] < cap) { rgs[i]++; std::fill(rgs.begin() + i + 1, rgs.end(), 0); break; }
            rgs[i] = 0;
        }
        if (i == 0) break;
    }
    return out;
}

} // namespace latree
