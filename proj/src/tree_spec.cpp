#include "varent/tree_spec.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

#include "varent/error.hpp"
#include "varent/generators.hpp"
#include "varent/verifier.hpp"

namespace varent {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

long parse_int(const std::string& text, const std::string& spec) {
    long v = 0;
    const auto* end = text.data() + text.size();
    const auto [p, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || p != end) throw DomainError("bad integer '" + text + "' in generator spec '" + spec + "'");
    return v;
}

double parse_real(const std::string& text, const std::string& spec) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw DomainError("bad number '" + text + "' in generator spec '" + spec + "'");
    return v;
}

std::vector<double> parse_reals(const std::string& text, const std::string& spec) {
    std::vector<double> out;
    for (const auto& t : split(text, ',')) out.push_back(parse_real(t, spec));
    return out;
}

void arity(const std::vector<std::string>& parts, std::size_t lo, std::size_t hi, const std::string& spec) {
    if (parts.size() < lo || parts.size() > hi) throw DomainError("wrong number of fields in generator spec '" + spec + "'");
}

}  // namespace

GeneratedTree tree_from_spec(const std::string& spec, int D, std::uint64_t seed) {
    const auto parts = split(spec, ':');
    if (parts.empty() || parts[0].empty()) throw DomainError("empty generator spec");
    const auto& name = parts[0];
    nlohmann::json meta{{"generator", name}, {"spec", spec}, {"depth", D}};
    if (name == "full") {
        arity(parts, 2, 2, spec);
        const int l = static_cast<int>(parse_int(parts[1], spec));
        return {full_shift(l, D), meta};
    }
    if (name == "sft") {
        arity(parts, 3, 3, spec);
        Alphabet alphabet(static_cast<int>(parse_int(parts[1], spec)));
        if (parts[2].rfind("forbid=", 0) != 0) throw DomainError("sft spec needs forbid=w1,w2,... in '" + spec + "'");
        std::vector<Word> forbidden;
        for (const auto& w : split(parts[2].substr(7), ',')) forbidden.push_back(parse_word(w, alphabet));
        return {sft_tree(alphabet, forbidden, D), meta};
    }
    if (name == "golden") {
        arity(parts, 1, 1, spec);
        return {golden_mean_tree(D), meta};
    }
    if (name == "freq" || name == "besicovitch") {
        arity(parts, 3, 3, spec);
        const auto p = parse_reals(parts[1], spec);
        const double delta = parse_real(parts[2], spec);
        meta["p"] = p;
        meta["delta"] = delta;
        if (name == "besicovitch") return {besicovitch_tree(p, delta, D), meta};
        return {frequency_tree(Alphabet(static_cast<int>(p.size())), {p, delta}, D), meta};
    }
    if (name == "single") {
        arity(parts, 1, 2, spec);
        const int l = parts.size() == 2 ? static_cast<int>(parse_int(parts[1], spec)) : 2;
        return {single_branch(Alphabet(l), D), meta};
    }
    if (name == "upper-density") {
        arity(parts, 1, 1, spec);
        return {upper_density_tree(D), meta};
    }
    if (name == "bushy") {
        arity(parts, 2, 2, spec);
        const int k = static_cast<int>(parse_int(parts[1], spec));
        meta["bushy"] = k;
        return {bushy_then_thin_tree(k, D), meta};
    }
    if (name == "random") {
        arity(parts, 1, 2, spec);
        const auto sd = parts.size() == 2 ? static_cast<std::uint64_t>(parse_int(parts[1], spec)) : seed;
        meta["seed"] = sd;
        return {random_pruned_tree(sd, D), meta};
    }
    if (name == "nontypical") {
        arity(parts, 3, 3, spec);
        const int l = static_cast<int>(parse_int(parts[1], spec));
        const double s = parse_real(parts[2], spec);
        auto nt = nontypical_tree(l, s, D);
        meta["target_s"] = s;
        meta["checkpoints"] = nt.checkpoints;
        meta["f_low"] = nt.f_low;
        meta["f_high"] = nt.f_high;
        meta["other_symbols"] = nt.other_symbols;
        meta["schedule_entropy"] = nt.schedule_entropy;
        meta["predicted_oscillation"] = nt.predicted_oscillation;
        nlohmann::json blocks = nlohmann::json::array();
        for (const auto& b : nt.schedule.blocks) blocks.push_back({{"length", b.length}, {"ones", b.ones}});
        meta["blocks"] = blocks;
        return {std::move(nt.tree), meta};
    }
    throw DomainError("unknown generator '" + name + "'");
}

}  // namespace varent
