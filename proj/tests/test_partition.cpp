#include <doctest.h>

#include <map>

#include "latree/error.hpp"
#include "latree/partition.hpp"
#include "latree/tree.hpp"

using namespace latree;

namespace {

LeafMask mk(std::initializer_list<int> labels) {
    LeafMask m = 0;
    for (int lab : labels) m |= LeafMask(1) << (lab - 1);
    return m;
}

} // namespace

TEST_CASE("induced partitions on the tripod") {
    TreeTopology t = parse_newick("(1,2,3)h;");
    NodeId h = t.root();

    EdgePartition p = induced_partition(t, mk({1, 2, 3}), {Edge(h, t.leaf_node(3))});
    CHECK(p.blocks == std::vector<LeafMask>{mk({1, 2}), mk({3})});
    CHECK(mask_popcount(p.removed_max) == 1); // only that edge induces 12|3

    EdgePartition q = induced_partition(
        t, mk({1, 2, 3}), {Edge(h, t.leaf_node(1)), Edge(h, t.leaf_node(2))});
    CHECK(q.block_count() == 3);
    CHECK(mask_popcount(q.removed_max) == 3); // maximal set is all three edges

    EdgePartition top = induced_partition(t, mk({1, 2, 3}), {});
    CHECK(top.blocks == std::vector<LeafMask>{mk({1, 2, 3})});
    CHECK(top.removed_max == 0);
}

TEST_CASE("poset sizes") {
    TreeTopology tripod = parse_newick("(1,2,3)h;");
    CHECK(build_poset(tripod, mk({1, 2, 3})).size() == 5);

    TreeTopology pair = parse_newick("(1,2)u;");
    CHECK(build_poset(pair, mk({1, 2})).size() == 2);

    TreeTopology quartet = parse_newick("(1,2,(3,4)a)r;");
    EdgePartitionPoset qp = build_poset(quartet, mk({1, 2, 3, 4}));
    CHECK(qp.is_element({mk({1, 2}), mk({3, 4})}));
    CHECK(qp.is_element({mk({1}), mk({2, 3, 4})}));
    CHECK_FALSE(qp.is_element({mk({1, 3}), mk({2, 4})}));
    CHECK_FALSE(qp.is_element({mk({1, 4}), mk({2, 3})}));
}

TEST_CASE("meet and join") {
    TreeTopology t = parse_newick("(1,2,3)h;");
    EdgePartitionPoset poset = build_poset(t, mk({1, 2, 3}));
    int p12 = poset.index_of({mk({1, 2}), mk({3})});
    int p13 = poset.index_of({mk({1, 3}), mk({2})});
    CHECK(poset.meet(p12, p13) == poset.bottom());
    CHECK(poset.join(p12, p13) == poset.top());
    for (int e = 0; e < poset.size(); ++e) {
        CHECK(poset.meet(e, poset.top()) == e);
        CHECK(poset.join(e, poset.bottom()) == e);
    }
}

TEST_CASE("lattice laws and partial order") {
    TreeTopology t = parse_newick("(1,2,(3,4)a)r;");
    EdgePartitionPoset poset = build_poset(t, mk({1, 2, 3, 4}));
    for (int p = 0; p < poset.size(); ++p) {
        CHECK(poset.leq(p, p));
        for (int q = 0; q < poset.size(); ++q) {
            if (poset.leq(p, q) && poset.leq(q, p)) CHECK(p == q);
            // absorption
            CHECK(poset.meet(p, poset.join(p, q)) == p);
            CHECK(poset.join(p, poset.meet(p, q)) == p);
            for (int d = 0; d < poset.size(); ++d)
                if (poset.leq(p, q) && poset.leq(q, d)) CHECK(poset.leq(p, d));
        }
    }
}

TEST_CASE("meet is the greatest lower bound, join the least upper bound") {
    for (const char* nw : {"(1,2,3)h;", "(1,2,(3,4)a)r;"}) {
        TreeTopology t = parse_newick(nw);
        EdgePartitionPoset poset = build_poset(t, full_mask(t.leaf_count()));
        for (int p = 0; p < poset.size(); ++p)
            for (int q = 0; q < poset.size(); ++q) {
                int m = poset.meet(p, q), j = poset.join(p, q);
                CHECK(poset.leq(m, p));
                CHECK(poset.leq(m, q));
                CHECK(poset.leq(p, j));
                CHECK(poset.leq(q, j));
                for (int d = 0; d < poset.size(); ++d) {
                    if (poset.leq(d, p) && poset.leq(d, q)) CHECK(poset.leq(d, m));
                    if (poset.leq(p, d) && poset.leq(q, d)) CHECK(poset.leq(j, d));
                }
            }
    }
}

TEST_CASE("mobius values on the tripod") {
    TreeTopology t = parse_newick("(1,2,3)h;");
    EdgePartitionPoset poset = build_poset(t, mk({1, 2, 3}));
    int top = poset.top(), bot = poset.bottom();
    int p12 = poset.index_of({mk({1, 2}), mk({3})});
    CHECK(poset.mobius(top, top) == 1);
    CHECK(poset.mobius(p12, p12) == 1);
    CHECK(poset.mobius(p12, top) == -1);
    CHECK(poset.mobius(bot, top) == 2);
    CHECK(poset.mobius(top, bot) == 0); // incomparable direction
}

TEST_CASE("mobius product over an interval") {
    TreeTopology t = parse_newick("(1,2,(3,4)a)r;");
    EdgePartitionPoset poset = build_poset(t, mk({1, 2, 3, 4}));
    int split = poset.index_of({mk({1, 2}), mk({3, 4})});
    // [0̂, 12|34] factors into the two 2-element block posets
    TreeTopology pairtree = parse_newick("(1,2)u;");
    EdgePartitionPoset p12 = build_poset(t, mk({1, 2}));
    EdgePartitionPoset p34 = build_poset(t, mk({3, 4}));
    long long left = p12.mobius(p12.bottom(), p12.top());
    long long right = p34.mobius(p34.bottom(), p34.top());
    CHECK(poset.mobius(poset.bottom(), split) == left * right);
    (void)pairtree;
}

TEST_CASE("mobius product formula across blocks") {
    TreeTopology t = parse_newick("(1,2,(3,4)a)r;");
    EdgePartitionPoset poset = build_poset(t, full_mask(4));
    for (int pi = 0; pi < poset.size(); ++pi)
        for (int nu = 0; nu < poset.size(); ++nu) {
            if (!poset.leq(nu, pi)) continue;
            long long prod = 1;
            for (LeafMask block : poset.element(pi).blocks) {
                if (mask_popcount(block) < 2) continue; // singleton posets are trivial
                EdgePartitionPoset sub = build_poset(t, block);
                // restriction of nu to the block
                std::vector<LeafMask> restricted;
                for (LeafMask nb : poset.element(nu).blocks)
                    if (nb & block) restricted.push_back(nb & block);
                prod *= sub.mobius(sub.index_of(restricted), sub.top());
            }
            CHECK(poset.mobius(nu, pi) == prod);
        }
}

TEST_CASE("defining identity and dual column agree") {
    for (const char* nw : {"(1,2,3)h;", "(1,2,(3,4)a)r;", "((1,2)a,(3,(4,5)d)b,6)c;"}) {
        TreeTopology t = parse_newick(nw);
        EdgePartitionPoset poset = build_poset(t, full_mask(t.leaf_count()));
        REQUIRE(poset.size() <= 200);
        const auto& col = poset.mobius_to_top();
        for (int p = 0; p < poset.size(); ++p) {
            CHECK(col[p] == poset.mobius(p, poset.top()));
            for (int q = 0; q < poset.size(); ++q) {
                if (!poset.leq(p, q)) continue;
                long long first = 0, second = 0;
                for (int d = 0; d < poset.size(); ++d) {
                    if (poset.leq(p, d) && poset.leq(d, q)) {
                        first += poset.mobius(p, d);
                        second += poset.mobius(d, q);
                    }
                }
                if (p == q) {
                    CHECK(first == 1);
                    CHECK(second == 1);
                } else {
                    CHECK(first == 0);
                    CHECK(second == 0);
                }
            }
        }
    }
}

TEST_CASE("Rota corollary") {
    for (const char* nw : {"(1,2,3)h;", "(1,2,(3,4)a)r;"}) {
        TreeTopology t = parse_newick(nw);
        EdgePartitionPoset poset = build_poset(t, full_mask(t.leaf_count()));
        for (int p0 = 0; p0 < poset.size(); ++p0) {
            if (p0 == poset.top()) continue;
            for (int nu = 0; nu < poset.size(); ++nu) {
                long long sum = 0;
                for (int p = 0; p < poset.size(); ++p)
                    if (poset.meet(p, p0) == nu) sum += poset.mobius(p, poset.top());
                CHECK(sum == 0);
            }
        }
    }
}

TEST_CASE("classical mobius and set partitions") {
    CHECK(classical_mobius_top(SetPartition{{mk({1, 2, 3})}}) == 1);
    CHECK(classical_mobius_top(SetPartition{{mk({1}), mk({2, 3})}}) == -1);
    CHECK(classical_mobius_top(SetPartition{{mk({1}), mk({2}), mk({3})}}) == 2);

    CHECK(enumerate_set_partitions(mk({1, 2})).size() == 2);
    CHECK(enumerate_set_partitions(mk({1, 2, 3})).size() == 5);
    CHECK(enumerate_set_partitions(mk({1, 2, 3, 4})).size() == 15);
    // works on non-contiguous label sets too
    CHECK(enumerate_set_partitions(mk({2, 5, 7})).size() == 5);
}

TEST_CASE("edge partition invariant: removing the maximal set reproduces the blocks") {
    TreeTopology t = parse_newick("((1,2)a,(3,(4,5)d)b,6)c;");
    EdgePartitionPoset poset = build_poset(t, full_mask(6));
    const auto& edges = poset.subtree_edges();
    for (int e = 0; e < poset.size(); ++e) {
        std::vector<Edge> removal;
        for (size_t i = 0; i < edges.size(); ++i)
            if ((poset.element(e).removed_max >> i) & 1) removal.push_back(edges[i]);
        EdgePartition again = induced_partition(t, full_mask(6), removal);
        CHECK(again.blocks == poset.element(e).blocks);
        CHECK(again.removed_max == poset.element(e).removed_max);
    }
}

TEST_CASE("hasse dump") {
    TreeTopology pair = parse_newick("(1,2)u;");
    EdgePartitionPoset poset = build_poset(pair, mk({1, 2}));
    CHECK(poset.hasse_dump() == "1|2 < 12\n");
    TreeTopology tripod = parse_newick("(1,2,3)h;");
    std::string dump = build_poset(tripod, mk({1, 2, 3})).hasse_dump();
    // 0̂ is covered by the three splits, each covered by 1̂
    CHECK(dump.find("1|2|3 < 12|3") != std::string::npos);
    CHECK(dump.find("12|3 < 123") != std::string::npos);
    CHECK(dump.find("1|2|3 < 123") == std::string::npos);
}

TEST_CASE("caps") {
    TreeTopology t = parse_newick("(1,2,3)h;");
    CHECK_THROWS_AS(build_poset(t, mk({1})), InputError);
    CHECK_THROWS_AS(enumerate_set_partitions(full_mask(11)), InputError);
    CHECK_THROWS_AS(
        induced_partition(t, mk({1, 2}), {Edge(t.root(), t.leaf_node(3))}),
        InputError); // edge outside T(I)
}
