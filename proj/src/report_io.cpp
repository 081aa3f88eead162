#include "varent/report_io.hpp"

#include <cmath>
#include <sstream>

#include "varent/error.hpp"
#include "varent/logmath.hpp"
#include "varent/tree_io.hpp"

namespace varent {

namespace {

using nlohmann::json;

// JSON has no infinities; they travel as null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double bits(double nats) { return nats / std::log(2.0); }

EntropyKind kind_from_string(const std::string& s) {
    for (auto k : {EntropyKind::bowen, EntropyKind::packing, EntropyKind::capacity, EntropyKind::weighted})
        if (s == to_string(k)) return k;
    throw DomainError("unknown entropy kind '" + s + "'");
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

json estimate_to_json(const EntropyEstimate& est, const DisplayOptions& display) {
    json diags = json::array();
    for (const auto& d : est.diagnostics)
        diags.push_back({{"label", d.label}, {"depth", d.depth}, {"N", d.N}, {"m", d.m}, {"s", d.s}, {"value", num(d.value)}});
    json j{{"schema_version", kSchemaVersion},
           {"kind", "entropy_estimate"},
           {"entropy", to_string(est.kind)},
           {"mode", to_string(est.mode)},
           {"value", est.value},
           {"s_low", est.s_low},
           {"s_high", est.s_high},
           {"depth", est.depth_used},
           {"N", est.N_used},
           {"m", est.m},
           {"iterations", est.iterations},
           {"converged", est.converged},
           {"note", est.note},
           {"unit", "nats"},
           {"diagnostics", diags}};
    if (display.base2) j["display"] = {{"unit", "bits"}, {"value", bits(est.value)}, {"s_low", bits(est.s_low)}, {"s_high", bits(est.s_high)}};
    return j;
}

EntropyEstimate estimate_from_json(const json& j) {
    if (j.value("schema_version", 0) != kSchemaVersion) throw DomainError("unsupported schema_version");
    if (j.value("kind", "") != "entropy_estimate") throw DomainError("not an entropy estimate");
    EntropyEstimate est;
    est.kind = kind_from_string(j.at("entropy").get<std::string>());
    est.mode = weight_mode_from_string(j.at("mode").get<std::string>());
    est.value = j.at("value").get<double>();
    est.s_low = j.at("s_low").get<double>();
    est.s_high = j.at("s_high").get<double>();
    est.depth_used = j.at("depth").get<int>();
    est.N_used = j.at("N").get<int>();
    est.m = j.at("m").get<int>();
    est.iterations = j.at("iterations").get<int>();
    est.converged = j.at("converged").get<bool>();
    est.note = j.at("note").get<std::string>();
    for (const auto& d : j.at("diagnostics"))
        est.diagnostics.push_back({d.at("label").get<std::string>(), d.at("depth").get<int>(), d.at("N").get<int>(),
                                   d.at("m").get<int>(), d.at("s").get<double>(),
                                   d.at("value").is_null() ? kNegInf : d.at("value").get<double>()});
    return est;
}

std::string diagnostics_csv(const EntropyEstimate& est) {
    std::ostringstream os;
    os.precision(17);
    os << "label,depth,N,m,s,value\n";
    for (const auto& d : est.diagnostics) os << d.label << ',' << d.depth << ',' << d.N << ',' << d.m << ',' << d.s << ',' << d.value << '\n';
    return os.str();
}

json vp_report_to_json(const VPReport& r, const DisplayOptions& display) {
    json measures = json::array();
    for (const auto& t : r.measures)
        measures.push_back({{"name", t.name},
                            {"provenance", t.provenance},
                            {"s", t.s},
                            {"value", t.value},
                            {"method", t.method},
                            {"feasible", t.feasible},
                            {"note", t.note}});
    json j{{"schema_version", kSchemaVersion},
           {"kind", "vp_report"},
           {"principle", r.kind},
           {"entropy_estimate", estimate_to_json(r.entropy, display)},
           {"measure_side", r.measure_side},
           {"gap", r.gap},
           {"gap_threshold", r.gap_threshold},
           {"easy_direction_ok", r.easy_direction_ok},
           {"gap_ok", r.gap_ok},
           {"degenerate", r.degenerate},
           {"flagged", r.flagged},
           {"note", r.note},
           {"parameters", {{"m", r.m}, {"D", r.D}, {"tol", r.tol}}},
           {"measures", measures}};
    if (display.base2) j["display"] = {{"unit", "bits"}, {"measure_side", bits(r.measure_side)}, {"gap", bits(r.gap)}};
    return j;
}

json frostman_to_json(const FrostmanResult& fr, const CylinderTree& tree, std::size_t node_limit) {
    json j{{"schema_version", kSchemaVersion},
           {"kind", "frostman_measure"},
           {"s", fr.s},
           {"log_c", fr.log_c},
           {"c", std::exp(fr.log_c)},
           {"min_depth", fr.weighting.min_depth},
           {"offset", fr.weighting.offset},
           {"log_max_bound_ratio", fr.log_max_ratio}};
    if (tree.is_explicit() || tree.depth() <= 16) {
        const auto entries = fr.measure.entries(node_limit);
        json e = json::array();
        for (const auto& [w, lm] : entries) e.push_back({format_word(w), num(lm)});
        j["entries"] = e;
    }
    return j;
}

json packing_frostman_to_json(const PackingFrostmanResult& pf) {
    json groups = json::array();
    for (const auto& g : pf.groups)
        groups.push_back({{"stage", g.stage},
                          {"depth", g.depth},
                          {"parent", g.parent},
                          {"count_per_parent", static_cast<double>(g.count_per_parent)},
                          {"log_weight", g.log_weight},
                          {"log_mass", g.log_final_mass - pf.log_total_mass},
                          {"representative", format_word(g.representative)}});
    return {{"schema_version", kSchemaVersion},
            {"kind", "packing_frostman"},
            {"s", pf.s},
            {"m", pf.m},
            {"mode", to_string(pf.mode)},
            {"stages", pf.stages},
            {"stage_min_depth", pf.stage_min_depth},
            {"stage_max_depth", pf.stage_max_depth},
            {"log_total_mass", pf.log_total_mass},
            {"C", pf.constant_C},
            {"worst_log_ratio", pf.worst_log_ratio},
            {"bound_holds", pf.bound_holds},
            {"groups", groups}};
}

json local_entropy_to_json(const LocalEntropyEstimate& est) {
    json values = json::array();
    for (double v : est.values) values.push_back(num(v));
    return {{"schema_version", kSchemaVersion},
            {"kind", "local_entropy"},
            {"point", format_word(est.point)},
            {"m", est.m},
            {"liminf_estimate", num(est.liminf_estimate)},
            {"limsup_estimate", num(est.limsup_estimate)},
            {"window", {est.window_begin, est.window_end}},
            {"values", values}};
}

json integral_to_json(const IntegralEstimate& est, LocalKind kind) {
    return {{"schema_version", kSchemaVersion},
            {"kind", "integral_local_entropy"},
            {"which", kind == LocalKind::lower ? "lower" : "upper"},
            {"value", num(est.value)},
            {"n_max", est.n_max},
            {"m", est.m},
            {"window_begin", est.window_begin},
            {"method", est.method},
            {"samples", est.samples},
            {"standard_error", est.standard_error}};
}

json suite_to_json(const SuiteReport& rep) {
    json summary = json::object();
    for (const auto& [name, pc] : rep.summary()) summary[name] = {{"passed", pc.first}, {"total", pc.second}};
    return {{"schema_version", kSchemaVersion},
            {"kind", "property_suite"},
            {"seed", rep.options.seed},
            {"count", rep.options.count},
            {"depth", rep.options.depth},
            {"tol", rep.options.tol},
            {"all_passed", rep.all_passed()},
            {"summary", summary},
            {"non_vacuity",
             {{"max_packing_minus_bowen", rep.max_packing_minus_bowen},
              {"tree", rep.max_separation_tree},
              {"adversarial_bowen", rep.adversarial_bowen},
              {"adversarial_packing", rep.adversarial_packing},
              {"required", rep.options.separation},
              {"ok", rep.non_vacuous}}},
            {"counterexamples", rep.counterexamples}};
}

std::string suite_csv(const SuiteReport& rep) {
    std::ostringstream os;
    os.precision(12);
    os << "tree,seed,invariant,pass,margin,detail\n";
    for (const auto& r : rep.rows)
        os << r.tree << ',' << r.seed << ',' << r.invariant << ',' << (r.pass ? 1 : 0) << ',' << r.margin << ','
           << csv_field(r.detail) << '\n';
    return os.str();
}

}  // namespace varent
