#pragma once

#include <string>

#include <json.hpp>

#include "latree/coords.hpp"
#include "latree/fiber.hpp"
#include "latree/params.hpp"
#include "latree/tree.hpp"

namespace latree {
namespace jsonio {

// insertion-ordered output keeps every file byte-deterministic
using OJson = nlohmann::ordered_json;

// coordinate vectors: {"n":…, "kind":"p|lambda|mu|kappa|rho",
// "entries":{"<mask>":value}, …} with means / rho_bar / tree added where the
// type carries them
OJson to_json(const ProbabilityTable& p);
OJson to_json(const NoncentralMoments& l);
OJson to_json(const CentralMoments& m);
OJson to_json(const TreeCumulants& k);
OJson to_json(const CorrelationCoords& r);

std::string coords_kind(const OJson& j);
ProbabilityTable table_from_json(const OJson& j);
NoncentralMoments lambda_from_json(const OJson& j);
CentralMoments mu_from_json(const OJson& j);
TreeCumulants kappa_from_json(const OJson& j, const TreeTopology* tree_override = nullptr);

// parameter files: {"tree":…, "chart":…, "root_p1":…, "edges":[{"u","v",
// "values"}], "nodes":[{"v","value"}]}; edges run parent -> child
OJson to_json(const ThetaParams& th);
OJson to_json(const OmegaParams& om);
OJson to_json(const RhoParams& rh);

struct LoadedParams {
    std::string chart; // "theta" | "omega" | "rho"
    ThetaParams theta;
    OmegaParams omega;
    RhoParams rho;

    // the omega view of whatever was loaded
    OmegaParams as_omega() const;
    // the theta view (validates constraints for omega/rho input)
    ThetaParams as_theta() const;
};

LoadedParams params_from_json(const OJson& j, const TreeTopology* tree_override = nullptr);

OJson to_json(const TreeTopology& t, const FiberReport& rep);

// the human-facing table: alpha, I, p, lambda, kappa columns
std::string table_csv(const ProbabilityTable& p, const NoncentralMoments& l,
                      const TreeCumulants& k, int precision);

} // namespace jsonio
} // namespace latree
