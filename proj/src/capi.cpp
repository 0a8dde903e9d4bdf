#include "latree.h"

#include <cstring>
#include <string>

#include "latree/coords.hpp"
#include "latree/error.hpp"
#include "latree/fiber.hpp"
#include "latree/json_io.hpp"
#include "latree/params.hpp"
#include "latree/selftest.hpp"
#include "latree/tree.hpp"

using latree::jsonio::OJson;

struct lt_tree {
    latree::TreeTopology topo;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn>
lt_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return LT_OK;
    } catch (const latree::Error& e) {
        g_last_error = e.what();
        return lt_status(int(e.kind()));
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return LT_ERR_INPUT;
    } catch (...) {
        g_last_error = "unknown error";
        return LT_ERR_INTERNAL;
    }
}

latree::CentralMoments coords_to_mu(const lt_tree* t, const OJson& j) {
    std::string kind = latree::jsonio::coords_kind(j);
    if (kind == "p") {
        auto p = latree::jsonio::table_from_json(j);
        return latree::lambda_to_mu(latree::p_to_lambda(p));
    }
    if (kind == "lambda")
        return latree::lambda_to_mu(latree::jsonio::lambda_from_json(j));
    if (kind == "mu") return latree::jsonio::mu_from_json(j);
    if (kind == "kappa") {
        auto k = latree::jsonio::kappa_from_json(j, t ? &t->topo : nullptr);
        return latree::kappa_to_mu(k);
    }
    throw latree::InputError("coordinate kind '" + kind + "' cannot drive the fiber analysis");
}

} // namespace

extern "C" {

const char* lt_last_error(void) { return g_last_error.c_str(); }

void lt_string_free(char* s) { delete[] s; }

lt_status lt_tree_parse(const char* newick, lt_tree** out) {
    if (!newick || !out) {
        g_last_error = "null argument";
        return LT_ERR_INPUT;
    }
    *out = nullptr;
    return guarded([&] { *out = new lt_tree{latree::parse_newick(newick)}; });
}

void lt_tree_free(lt_tree* t) { delete t; }

lt_status lt_tree_newick(const lt_tree* t, char** out) {
    if (!t || !out) {
        g_last_error = "null argument";
        return LT_ERR_INPUT;
    }
    return guarded([&] { *out = dup_string(latree::to_newick(t->topo)); });
}

int lt_tree_leaf_count(const lt_tree* t) { return t ? t->topo.leaf_count() : -1; }

int lt_tree_node_count(const lt_tree* t) { return t ? t->topo.node_count() : -1; }

lt_status lt_forward(const lt_tree* t, const char* params_json, int csv_precision,
                     char** bundle_json) {
    if (!t || !params_json || !bundle_json) {
        g_last_error = "null argument";
        return LT_ERR_INPUT;
    }
    return guarded([&] {
        OJson pj = OJson::parse(params_json);
        auto loaded = latree::jsonio::params_from_json(pj, &t->topo);
        latree::ThetaParams theta = loaded.as_theta();
        latree::ProbabilityTable p = latree::model_forward(theta);
        latree::NoncentralMoments l = latree::p_to_lambda(p);
        latree::CentralMoments m = latree::lambda_to_mu(l);
        latree::TreeCumulants k = latree::mu_to_kappa(t->topo, m);

        OJson bundle;
        bundle["p"] = latree::jsonio::to_json(p);
        bundle["lambda"] = latree::jsonio::to_json(l);
        bundle["mu"] = latree::jsonio::to_json(m);
        bundle["kappa"] = latree::jsonio::to_json(k);
        bool degenerate = false;
        for (int i = 1; i <= k.n; ++i)
            if (k.mu_bar(i) * k.mu_bar(i) >= 1.0) degenerate = true;
        if (degenerate)
            bundle["rho"] = nullptr;
        else
            bundle["rho"] = latree::jsonio::to_json(latree::kappa_to_rho(k));
        bundle["csv"] = latree::jsonio::table_csv(p, l, k, csv_precision > 0 ? csv_precision : 4);
        *bundle_json = dup_string(bundle.dump(2));
    });
}

lt_status lt_fiber(const lt_tree* t, const char* coords_json, double eps, int with_points,
                   char** report_json) {
    if (!t || !coords_json || !report_json) {
        g_last_error = "null argument";
        return LT_ERR_INPUT;
    }
    return guarded([&] {
        OJson cj = OJson::parse(coords_json);
        latree::CentralMoments m = coords_to_mu(t, cj);
        if (m.n != t->topo.leaf_count())
            throw latree::InputError("coordinate file and tree disagree on the leaf count");
        latree::FiberReport rep;
        if (with_points) {
            rep = latree::recover_fiber(t->topo, m, eps);
        } else {
            rep = latree::classify_fiber(t->topo, latree::covariance_summary(m, eps));
        }
        *report_json = dup_string(latree::jsonio::to_json(t->topo, rep).dump(2));
    });
}

lt_status lt_switch(const lt_tree* t, const char* omega_params_json, const char* nodes_csv,
                    char** out_params_json) {
    if (!t || !omega_params_json || !nodes_csv || !out_params_json) {
        g_last_error = "null argument";
        return LT_ERR_INPUT;
    }
    return guarded([&] {
        OJson pj = OJson::parse(omega_params_json);
        auto loaded = latree::jsonio::params_from_json(pj, &t->topo);
        latree::OmegaParams om = loaded.as_omega();
        std::string csv = nodes_csv;
        size_t pos = 0;
        while (pos < csv.size()) {
            size_t comma = csv.find(',', pos);
            std::string ref = csv.substr(pos, comma == std::string::npos ? std::string::npos
                                                                         : comma - pos);
            if (!ref.empty()) {
                auto v = t->topo.resolve_ref(ref);
                if (!v) throw latree::InputError("unknown node '" + ref + "'");
                om = latree::local_sign_switch(om, *v);
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        *out_params_json = dup_string(latree::jsonio::to_json(om).dump(2));
    });
}

lt_status lt_selftest(const char* suite, unsigned long seed, char** summary_json) {
    if (!summary_json) {
        g_last_error = "null argument";
        return LT_ERR_INPUT;
    }
    lt_status rc = guarded([&] {
        auto summary = latree::selftest::run(suite ? suite : "", seed);
        OJson j;
        OJson suites = OJson::array();
        for (const auto& s : summary.suites) {
            OJson e;
            e["name"] = s.name;
            e["passed"] = s.passed;
            e["failed"] = s.failed;
            e["failures"] = s.failures;
            suites.push_back(e);
        }
        j["suites"] = suites;
        j["ok"] = summary.ok();
        *summary_json = dup_string(j.dump(2));
        if (!summary.ok()) {
            g_last_error = "selftest failures";
            throw latree::InternalError("selftest failures");
        }
    });
    return rc;
}

} // extern "C"
