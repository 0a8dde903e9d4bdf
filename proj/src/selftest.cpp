#include "latree/selftest.hpp"

#include <cmath>
#include <numeric>

#include "latree/coords.hpp"
#include "latree/error.hpp"
#include "latree/fiber.hpp"
#include "latree/oracle.hpp"
#include "latree/partition.hpp"

namespace latree {
namespace selftest {

namespace {

void expect(SuiteResult& r, bool cond, const std::string& what) {
    if (cond) {
        r.passed++;
    } else {
        r.failed++;
        r.failures.push_back(what);
    }
}

void expect_near(SuiteResult& r, double got, double want, double tol, const std::string& what) {
    expect(r, std::abs(got - want) <= tol,
           what + ": got " + std::to_string(got) + ", want " + std::to_string(want));
}

// row index of the reference table -> leaf mask (leaf 1 is the leftmost digit)
LeafMask row_mask(size_t row, int n) {
    LeafMask mask = 0;
    for (int i = 0; i < n; ++i)
        if ((row >> (n - 1 - i)) & 1) mask |= LeafMask(1) << i;
    return mask;
}

} // namespace

ThetaParams quartet_fixture() {
    TreeTopology t = parse_newick("(1,2,(3,4)a)r;");
    ThetaParams th = make_theta(t);
    th.root_p1 = 0.8;
    auto set = [&](int label_or_inner, double t10, double t11) {
        NodeId v = label_or_inner;
        th.cond_1g0[v] = t10;
        th.cond_1g1[v] = t11;
    };
    // parse order: r=0, 1, 2, a=3, 3, 4
    set(*t.resolve_ref("1"), 0.3, 0.8);
    set(*t.resolve_ref("2"), 0.3, 0.7);
    set(*t.resolve_ref("a"), 0.3, 0.8);
    set(*t.resolve_ref("3"), 0.3, 0.7);
    set(*t.resolve_ref("4"), 0.3, 0.7);
    return th;
}

TreeTopology random_tree(int n_leaves, std::mt19937_64& rng, bool allow_degree_two) {
    if (n_leaves < 2) throw InputError("random tree needs >= 2 leaves");
    std::vector<Edge> edges;
    std::vector<int> labels(n_leaves);
    std::iota(labels.begin(), labels.end(), 1);
    std::vector<int> frags(n_leaves);
    std::iota(frags.begin(), frags.end(), 0);
    int next_id = n_leaves;
    std::uniform_int_distribution<int> kd(2, 4);
    while (frags.size() > 1) {
        if (frags.size() == 2 && (frags[0] >= n_leaves || frags[1] >= n_leaves)) {
            // join the last two fragments directly so the root does not end
            // up with degree two
            edges.emplace_back(frags[0], frags[1]);
            if (frags[0] < n_leaves) std::swap(frags[0], frags[1]);
            frags.pop_back();
            break;
        }
        int k = std::min<int>(kd(rng), int(frags.size()));
        int fresh = next_id++;
        labels.push_back(0);
        for (int pick = 0; pick < k; ++pick) {
            std::uniform_int_distribution<size_t> idx(0, frags.size() - 1);
            size_t at = idx(rng);
            edges.emplace_back(fresh, frags[at]);
            frags.erase(frags.begin() + at);
        }
        frags.push_back(fresh);
    }
    if (allow_degree_two && std::uniform_real_distribution<double>(0, 1)(rng) < 0.3) {
        std::uniform_int_distribution<size_t> idx(0, edges.size() - 1);
        size_t at = idx(rng);
        Edge e = edges[at];
        edges.erase(edges.begin() + at);
        int mid = next_id++;
        labels.push_back(0);
        edges.emplace_back(e.u, mid);
        edges.emplace_back(mid, e.v);
    }
    return TreeTopology::build(next_id, edges, labels, frags[0]);
}

ThetaParams random_theta(const TreeTopology& t, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    ThetaParams th = make_theta(t);
    th.root_p1 = u(rng);
    for (NodeId v = 0; v < t.node_count(); ++v) {
        if (v == t.root()) continue;
        th.cond_1g0[v] = u(rng);
        th.cond_1g1[v] = u(rng);
    }
    return th;
}

namespace {

// the reference table for the bundled quartet fixture, 4 decimals
constexpr double kTableP[16] = {0.0444, 0.0307, 0.0307, 0.0403, 0.0346, 0.0323,
                                0.0323, 0.0547, 0.0482, 0.0491, 0.0491, 0.0875,
                                0.0828, 0.0979, 0.0979, 0.1875};
constexpr double kTableLambda[16] = {1.0000, 0.5800, 0.5800, 0.3700, 0.6200, 0.3724,
                                     0.3724, 0.2422, 0.7000, 0.4220, 0.4220, 0.2750,
                                     0.4660, 0.2853, 0.2853, 0.1875};
constexpr double kTableKappa[16] = {0, 0, 0, 0.0336, 0, 0.0128, 0.0128, -0.0020,
                                    0, 0.0160, 0.0160, -0.0026, 0.0320, -0.0038,
                                    -0.0038, 0.0006};

SuiteResult suite_table1() {
    SuiteResult r;
    r.name = "table1";
    ThetaParams th = quartet_fixture();
    ProbabilityTable p = model_forward(th);
    NoncentralMoments l = p_to_lambda(p);
    CentralMoments m = lambda_to_mu(l);
    TreeCumulants k = mu_to_kappa(th.tree, m);
    for (size_t row = 0; row < 16; ++row) {
        LeafMask mask = row_mask(row, 4);
        expect_near(r, p.values[mask], kTableP[row], 5e-5, "p row " + std::to_string(row));
        expect_near(r, l.values[mask], kTableLambda[row], 5e-5,
                    "lambda row " + std::to_string(row));
        double kv = mask_popcount(mask) >= 2 ? k.kappa[mask] : 0.0;
        expect_near(r, kv, kTableKappa[row], 5e-5, "kappa row " + std::to_string(row));
    }
    CovarianceSummary c = covariance_summary(m, 1e-9);
    TripodSquares tri = recover_tripod(c, 1, 2, 3);
    expect_near(r, tri.mu_bar_h_sq, 0.36, 1e-10, "recovered root μ̄²");
    expect_near(r, tri.eta_i_sq, 0.25, 1e-10, "recovered η²_{r,1}");
    TripodSquares alt = recover_tripod(c, 1, 2, 4);
    expect_near(r, alt.mu_bar_h_sq, 0.36, 1e-10, "triple-choice independence");
    FiberReport rep = recover_fiber(th.tree, m, 1e-9);
    expect(r, rep.classification == FiberClass::FiniteSmooth, "quartet fiber is finite");
    expect(r, rep.points.size() == 4, "quartet fiber has 4 points");
    return r;
}

SuiteResult suite_roundtrip(uint64_t seed) {
    SuiteResult r;
    r.name = "roundtrip";
    std::mt19937_64 rng(seed);
    for (int trial = 0; trial < 40; ++trial) {
        int n = 2 + int(rng() % 4); // 2..5
        TreeTopology t = random_tree(n, rng);
        ProbabilityTable p = make_table(n);
        double sum = 0;
        for (auto& x : p.values) sum += (x = std::uniform_real_distribution<double>(0, 1)(rng));
        for (auto& x : p.values) x /= sum;
        NoncentralMoments l = p_to_lambda(p);
        ProbabilityTable p2 = lambda_to_p(l);
        double worst = 0;
        for (size_t a = 0; a < p.values.size(); ++a)
            worst = std::max(worst, std::abs(p.values[a] - p2.values[a]));
        expect(r, worst <= 1e-12, "p<->lambda roundtrip");
        CentralMoments m = lambda_to_mu(l);
        NoncentralMoments l2 = mu_to_lambda(m);
        worst = 0;
        for (size_t a = 0; a < l.values.size(); ++a)
            worst = std::max(worst, std::abs(l.values[a] - l2.values[a]));
        expect(r, worst <= 1e-12, "lambda<->mu roundtrip");
        TreeCumulants k = mu_to_kappa(t, m);
        CentralMoments m2 = kappa_to_mu(k);
        worst = 0;
        for (size_t a = 0; a < m.mu.size(); ++a)
            worst = std::max(worst, std::abs(m.mu[a] - m2.mu[a]));
        expect(r, worst <= 1e-12, "mu<->kappa roundtrip");

        ThetaParams th = random_theta(t, rng);
        OmegaParams om = theta_to_omega(th);
        ThetaParams th2 = omega_to_theta(om);
        worst = std::abs(th.root_p1 - th2.root_p1);
        for (NodeId v = 0; v < t.node_count(); ++v) {
            if (v == t.root()) continue;
            worst = std::max(worst, std::abs(th.cond_1g0[v] - th2.cond_1g0[v]));
            worst = std::max(worst, std::abs(th.cond_1g1[v] - th2.cond_1g1[v]));
        }
        expect(r, worst <= 1e-12, "theta<->omega roundtrip");
        RhoParams rh = omega_to_rho(om);
        OmegaParams om2 = rho_to_omega(rh);
        worst = 0;
        for (NodeId v = 0; v < t.node_count(); ++v) {
            worst = std::max(worst, std::abs(om.mu_bar[v] - om2.mu_bar[v]));
            if (v != t.root()) worst = std::max(worst, std::abs(om.eta[v] - om2.eta[v]));
        }
        expect(r, worst <= 1e-12, "omega<->rho roundtrip");
    }
    return r;
}

SuiteResult suite_psi(uint64_t seed) {
    SuiteResult r;
    r.name = "psi";
    std::mt19937_64 rng(seed);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 3 + int(rng() % 4); // 3..6
        TreeTopology t = random_tree(n, rng);
        ThetaParams th = random_theta(t, rng);
        OmegaParams om = theta_to_omega(th);
        TreeCumulants via_psi = psi_contracted(om);
        TreeCumulants via_moments = mu_to_kappa(t, lambda_to_mu(p_to_lambda(model_forward(th))));
        double worst = 0;
        for (size_t a = 0; a < via_psi.kappa.size(); ++a)
            worst = std::max(worst, std::abs(via_psi.kappa[a] - via_moments.kappa[a]));
        expect(r, worst <= 1e-10, "psi equals the moment pipeline (err " +
                                      std::to_string(worst) + ")");
    }
    return r;
}

SuiteResult suite_mobius() {
    SuiteResult r;
    r.name = "mobius";
    TreeTopology tripod = parse_newick("(1,2,3)h;");
    TreeTopology quartet = parse_newick("(1,2,(3,4)a)r;");
    for (const TreeTopology* t : {&tripod, &quartet}) {
        EdgePartitionPoset poset = build_poset(*t, full_mask(t->leaf_count()));
        bool defining_ok = true, rota_ok = true;
        for (int p = 0; p < poset.size(); ++p)
            for (int q = 0; q < poset.size(); ++q) {
                if (p == q || !poset.leq(p, q)) continue;
                long long sum = 0;
                for (int d = 0; d < poset.size(); ++d)
                    if (poset.leq(p, d) && poset.leq(d, q)) sum += poset.mobius(p, d);
                if (sum != 0) defining_ok = false;
            }
        for (int p0 = 0; p0 < poset.size(); ++p0) {
            if (p0 == poset.top()) continue;
            for (int nu = 0; nu < poset.size(); ++nu) {
                long long sum = 0;
                for (int p = 0; p < poset.size(); ++p)
                    if (poset.meet(p, p0) == nu) sum += poset.mobius(p, poset.top());
                if (sum != 0) rota_ok = false;
            }
        }
        expect(r, defining_ok, "defining identity");
        expect(r, rota_ok, "Rota corollary");
    }
    auto parts = enumerate_set_partitions(full_mask(4));
    expect(r, parts.size() == 15, "Bell(4) = 15");
    for (const auto& sp : parts) {
        long long want = 1;
        for (int i = 2; i < sp.block_count(); ++i) want *= i;
        if (sp.block_count() % 2 == 0) want = -want;
        expect(r, classical_mobius_top(sp) == want, "classical Möbius closed form");
    }
    return r;
}

SuiteResult suite_fiber() {
    SuiteResult r;
    r.name = "fiber";
    // singular tripod: product distribution
    TreeTopology tripod = parse_newick("(1,2,3)h;");
    ThetaParams th = make_theta(tripod);
    th.root_p1 = 0.5;
    for (NodeId v = 0; v < tripod.node_count(); ++v) {
        if (v == tripod.root()) continue;
        th.cond_1g0[v] = 0.3 + 0.1 * v;
        th.cond_1g1[v] = 0.3 + 0.1 * v; // η = 0 everywhere
    }
    CentralMoments m = lambda_to_mu(p_to_lambda(model_forward(th)));
    FiberReport rep = recover_fiber(tripod, m, 1e-9);
    expect(r, rep.classification == FiberClass::Singular, "product tripod is singular");
    expect(r, rep.deepest && rep.deepest->minimal_pairs.size() == 4,
           "tripod deepest singularity has 4 minimal pairs");

    // quartet with only the inner edge switched off
    ThetaParams qh = quartet_fixture();
    NodeId a = *qh.tree.resolve_ref("a");
    qh.cond_1g0[a] = 0.55;
    qh.cond_1g1[a] = 0.55;
    CentralMoments qm = lambda_to_mu(p_to_lambda(model_forward(qh)));
    FiberReport qrep = recover_fiber(qh.tree, qm, 1e-9);
    expect(r, qrep.classification == FiberClass::ManifoldWithCorners,
           "inner-edge-off quartet is a manifold");
    expect(r, qrep.dimension == 4, "manifold dimension 2*l2 = 4");
    return r;
}

} // namespace

Summary run(const std::string& suite_filter, uint64_t seed) {
    Summary s;
    auto want = [&](const char* name) {
        return suite_filter.empty() || suite_filter == name;
    };
    if (want("table1")) s.suites.push_back(suite_table1());
    if (want("roundtrip")) s.suites.push_back(suite_roundtrip(seed));
    if (want("psi")) s.suites.push_back(suite_psi(seed + 1));
    if (want("mobius")) s.suites.push_back(suite_mobius());
    if (want("fiber")) s.suites.push_back(suite_fiber());
    if (s.suites.empty()) throw InputError("unknown suite '" + suite_filter + "'");
    return s;
}

} // namespace selftest
} // namespace latree
