#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "latree/params.hpp"
#include "latree/tree.hpp"

namespace latree {
namespace selftest {

struct SuiteResult {
    std::string name;
    int passed = 0;
    int failed = 0;
    std::vector<std::string> failures;
};

struct Summary {
    std::vector<SuiteResult> suites;
    bool ok() const {
        for (const auto& s : suites)
            if (s.failed) return false;
        return true;
    }
};

// suites: table1, roundtrip, psi, mobius, fiber; empty filter runs all
Summary run(const std::string& suite_filter = "", uint64_t seed = 20110517);

// the bundled quartet example: root r over leaves 1,2 and cherry (3,4)a
ThetaParams quartet_fixture();

// random leaf-labeled topology; inner degrees up to 5, optional degree-2 nodes
TreeTopology random_tree(int n_leaves, std::mt19937_64& rng, bool allow_degree_two = true);

// conditionals uniform over [lo, hi]
ThetaParams random_theta(const TreeTopology& t, std::mt19937_64& rng, double lo = 0.05,
                         double hi = 0.95);

} // namespace selftest
} // namespace latree
