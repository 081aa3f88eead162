#pragma once

#include <string>

#include "json.hpp"
#include "varent/entropy.hpp"
#include "varent/frostman.hpp"
#include "varent/measure.hpp"
#include "varent/verifier.hpp"

namespace varent {

// Display options: values are computed in nats; base2 adds bit-valued copies.
struct DisplayOptions {
    bool base2 = false;
};

nlohmann::json estimate_to_json(const EntropyEstimate& est, const DisplayOptions& display = {});
EntropyEstimate estimate_from_json(const nlohmann::json& j);
// label,depth,N,m,s,value
std::string diagnostics_csv(const EntropyEstimate& est);

nlohmann::json vp_report_to_json(const VPReport& r, const DisplayOptions& display = {});

nlohmann::json frostman_to_json(const FrostmanResult& fr, const CylinderTree& tree, std::size_t node_limit = 100'000);
nlohmann::json packing_frostman_to_json(const PackingFrostmanResult& pf);

nlohmann::json local_entropy_to_json(const LocalEntropyEstimate& est);
nlohmann::json integral_to_json(const IntegralEstimate& est, LocalKind kind);

nlohmann::json suite_to_json(const SuiteReport& rep);
// tree,seed,invariant,pass,margin,detail
std::string suite_csv(const SuiteReport& rep);

}  // namespace varent
