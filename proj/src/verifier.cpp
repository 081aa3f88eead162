#include "varent/verifier.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "varent/engines.hpp"
#include "varent/error.hpp"
#include "varent/frostman.hpp"
#include "varent/logmath.hpp"
#include "varent/tree_io.hpp"

namespace varent {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::vector<double> uniform(int l) { return std::vector<double>(static_cast<std::size_t>(l), 1.0 / l); }

TestedMeasure integrate(const CylinderMeasure& mu, ScaleIndex m, LocalKind kind, const IntegralOptions& opt, std::string name,
                        std::string provenance, double s) {
    const int n_max = mu.tree().depth() - m.value();
    const auto r = integral_local_entropy(mu, m, n_max, kind, opt);
    TestedMeasure t;
    t.name = std::move(name);
    t.provenance = std::move(provenance);
    t.s = s;
    t.value = r.value;
    t.method = r.method;
    if (mu.renormalized()) t.note = "conditionals renormalized on the tree";
    return t;
}

void finish_report(VPReport& r) {
    r.measure_side = 0.0;
    bool any = false;
    for (const auto& t : r.measures)
        if (t.feasible) {
            r.measure_side = any ? std::max(r.measure_side, t.value) : t.value;
            any = true;
        }
    r.degenerate = !any;
    r.gap = r.entropy.value - r.measure_side;
    r.easy_direction_ok = r.measure_side <= r.entropy.s_high + r.tol;
    r.gap_ok = any && r.gap <= r.gap_threshold;
}

// Integral of the upper estimate along the stage subsequence: each branch through a
// final-stage group scores max over stages p >= p0 of -log mu(u_p) / |u_p|.
TestedMeasure stage_subsequence_upper(const PackingFrostmanResult& pf, int p0) {
    std::vector<double> stat(pf.groups.size(), kNegInf);
    std::vector<double> log_members(pf.groups.size(), 0.0);
    LogAccumulator check;
    double total = 0.0;
    for (std::size_t i = 0; i < pf.groups.size(); ++i) {
        const auto& g = pf.groups[i];
        const double lmu = g.log_final_mass - pf.log_total_mass;
        const double here = g.stage >= p0 ? -lmu / g.depth : kNegInf;
        const double up = g.parent >= 0 ? stat[static_cast<std::size_t>(g.parent)] : kNegInf;
        stat[i] = std::max(here, up);
        log_members[i] = static_cast<double>(std::log(g.count_per_parent)) +
                         (g.parent >= 0 ? log_members[static_cast<std::size_t>(g.parent)] : 0.0);
        if (g.stage == pf.stages) {
            const double share = std::exp(log_members[i] + lmu);
            total += share * stat[i];
        }
    }
    TestedMeasure t;
    t.name = "packing_frostman";
    t.provenance = "staged antichain windows, " + std::to_string(pf.stages) + " stages, depths " +
                   std::to_string(pf.stage_min_depth.front()) + ".." + std::to_string(pf.stage_max_depth.back());
    t.s = pf.s;
    t.value = total;
    t.method = "stage_subsequence";
    if (!pf.bound_holds) t.note = "mass bound C e^{-s n} violated";
    return t;
}

}  // namespace

VPReport verify_bowen_vp(std::shared_ptr<const CylinderTree> tree, ScaleIndex m, double tol, const BowenVPOptions& opt) {
    VPReport r;
    r.kind = "bowen";
    r.m = m.value();
    r.D = tree->depth();
    r.tol = tol;
    r.gap_threshold = opt.gap_threshold;
    r.entropy = bowen_entropy(*tree, m, tol);
    const int N = r.entropy.N_used;
    for (double f : opt.s_fractions) {
        const double s = f * r.entropy.s_low;
        try {
            const auto fr = frostman_measure(tree, s, N, m, WeightMode::depth);
            auto t = integrate(fr.measure, m, LocalKind::lower, opt.integral, "frostman",
                               "normalized max flow, s = " + fmt(s) + ", N = " + std::to_string(N), s);
            if (fr.log_max_ratio > std::log1p(1e-9)) t.note = "Frostman bound violated";
            r.measures.push_back(std::move(t));
        } catch (const DomainError& e) {
            r.measures.push_back({"frostman", "s = " + fmt(s), s, 0.0, "", false, e.what()});
        }
    }
    const auto u = uniform(tree->alphabet().size());
    r.measures.push_back(integrate(bernoulli(tree, u), m, LocalKind::lower, opt.integral, "bernoulli_uniform",
                                   "uniform product measure restricted to the tree", 0.0));
    finish_report(r);
    if (r.degenerate) r.note = "no Frostman measure at any grid point";
    return r;
}

VPReport verify_packing_vp(std::shared_ptr<const CylinderTree> tree, ScaleIndex m, double tol, int stages,
                           const PackingVPOptions& opt) {
    if (stages < 1) throw DomainError("stages must be >= 1");
    VPReport r;
    r.kind = "packing";
    r.m = m.value();
    r.D = tree->depth();
    r.tol = tol;
    r.gap_threshold = opt.gap_threshold;
    r.entropy = packing_entropy(*tree, m, tol);
    const double s = (1.0 - opt.margin) * r.entropy.s_low;
    std::string failure;
    for (int k = stages; k >= 1; --k) {
        try {
            const auto pf = packing_frostman(*tree, s, m, k, {1, WeightMode::depth});
            r.measures.push_back(stage_subsequence_upper(pf, std::min(2, k)));
            if (k < stages) {
                r.flagged = true;
                r.note = "packing-Frostman fell back to " + std::to_string(k) + " stages: " + failure;
            }
            break;
        } catch (const InfeasibleError& e) {
            if (failure.empty()) failure = e.what();
        }
    }
    if (r.measures.empty()) {
        r.flagged = true;
        r.note = "packing-Frostman infeasible, parametric candidates only: " + failure;
        r.measures.push_back({"packing_frostman", "s = " + fmt(s), s, 0.0, "", false, failure});
    }
    const auto u = uniform(tree->alphabet().size());
    r.measures.push_back(integrate(bernoulli(tree, u), m, LocalKind::upper, opt.integral, "bernoulli_uniform",
                                   "uniform product measure restricted to the tree", 0.0));
    finish_report(r);
    return r;
}

CylinderTree besicovitch_tree(const std::vector<double>& p, double delta, int D) {
    if (!(delta >= 0.0)) throw DomainError("delta must be >= 0");
    try {
        return frequency_tree(Alphabet(static_cast<int>(p.size())), {p, delta}, D);
    } catch (const EmptyCompactSet&) {
        throw InfeasibleError("no depth-" + std::to_string(D) + " word has frequencies within " + fmt(delta) +
                              " of the targets; increase delta or D");
    }
}

namespace {

double log_binomial(int n, int k) { return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0); }

// log count of an exact-count block: choose the ones, fill the rest with r symbols.
double block_log_count(int L, int k, int r) { return log_binomial(L, k) + (L - k) * std::log(static_cast<double>(r)); }

// Ones count on one side of the peak whose block rate is closest to s.
int tune_ones(int L, int r, double s, bool sparse) {
    const int peak = static_cast<int>(std::lround(static_cast<double>(L) / (r + 1)));
    int best = sparse ? 0 : L;
    double err = kPosInf;
    for (int k = sparse ? 0 : peak; sparse ? k <= peak : k <= L; ++k) {
        const double e = std::abs(block_log_count(L, k, r) - s * L);
        if (e < err) {
            err = e;
            best = k;
        }
    }
    return best;
}

struct Plan {
    BlockSchedule schedule;
    std::vector<int> checkpoints;
    std::vector<int> ones;
    double log_count = 0.0;
    double oscillation = 0.0;
};

Plan plan_schedule(int D, double s, int r) {
    Plan p;
    std::vector<int> ends;
    for (int c = D; c >= 8; c /= 4) ends.push_back(c);
    if (ends.empty()) ends.push_back(D);
    std::reverse(ends.begin(), ends.end());
    p.checkpoints = ends;
    int start = 0;
    const auto K = ends.size();
    for (std::size_t k = 0; k < K; ++k) {
        const int L = ends[k] - start;
        // The last block is sparse; parity alternates backwards from it.
        const bool sparse = (K - 1 - k) % 2 == 0;
        const int ones = tune_ones(L, r, s, sparse);
        Block b;
        b.kind = Block::Kind::exact_count;
        b.length = L;
        for (int q = 2; q <= r + 1; ++q) b.allowed.push_back(static_cast<Symbol>(q));
        b.ones = ones;
        p.schedule.blocks.push_back(b);
        p.ones.push_back(ones);
        p.log_count += block_log_count(L, ones, r);
        start = ends[k];
    }
    if (K >= 2) {
        long total = 0;
        for (std::size_t k = 0; k + 1 < K; ++k) total += p.ones[k];
        const double a = static_cast<double>(total) / ends[K - 2];
        const double b = static_cast<double>(total + p.ones[K - 1]) / ends[K - 1];
        p.oscillation = std::abs(a - b);
    }
    return p;
}

}  // namespace

NontypicalTree nontypical_tree(int l, double s, int D) {
    Alphabet alphabet(l);
    if (!(s >= 0.0) || !(s < std::log(static_cast<double>(l))))
        throw DomainError("target s must satisfy 0 <= s < log l");
    if (D < 8) throw DomainError("nontypical schedule needs D >= 8");
    // Other symbols r: sparse and dense block rates straddle the peak only when log r <= s <= log(r+1).
    const int r = std::clamp(static_cast<int>(std::floor(std::exp(s) + 1e-12)), 1, l - 1);
    const double threshold = 0.2;
    auto plan = plan_schedule(D, s, r);
    if (plan.oscillation < threshold) {
        int feasible = 0;
        for (long Dp = 2L * D; Dp <= (1L << 24); Dp *= 2)
            if (plan_schedule(static_cast<int>(Dp), s, r).oscillation >= threshold) {
                feasible = static_cast<int>(Dp);
                break;
            }
        throw InfeasibleError("s = " + fmt(s) + " is too close to log " + std::to_string(l) +
                              " for the schedule to oscillate at D = " + std::to_string(D) +
                              (feasible ? "; minimal feasible D (doubling search) is " + std::to_string(feasible)
                                        : std::string("; no feasible D up to 2^24")));
    }
    NontypicalTree out{block_schedule_tree(alphabet, plan.schedule, D), plan.schedule, plan.checkpoints, 0.0, 0.0, r,
                       plan.log_count / D, plan.oscillation};
    // Frequencies of the last sparse block and of the last dense block.
    const auto K = plan.ones.size();
    out.f_low = static_cast<double>(plan.ones[K - 1]) / plan.schedule.blocks[K - 1].length;
    out.f_high = K >= 2 ? static_cast<double>(plan.ones[K - 2]) / plan.schedule.blocks[K - 2].length : out.f_low;
    return out;
}

OscillationSweep checkpoint_oscillation(const CylinderTree& tree, int a, int b, double threshold) {
    if (!(1 <= a && a < b && b <= tree.depth())) throw DomainError("checkpoints need 1 <= a < b <= D");
    OscillationSweep out;
    out.checkpoint_a = a;
    out.checkpoint_b = b;
    out.threshold = threshold;
    // State: (class, ones so far, ones at a or -1), with branch multiplicity.
    struct Key {
        ClassId c;
        int ones;
        int at_a;
        bool operator<(const Key& o) const { return std::tie(c, ones, at_a) < std::tie(o.c, o.ones, o.at_a); }
    };
    std::map<Key, long double> cur{{{0, 0, -1}, 1.0L}};
    for (int d = 0; d < tree.depth(); ++d) {
        std::map<Key, long double> next;
        for (const auto& [k, mult] : cur)
            for (const auto& e : tree.children(d, k.c)) {
                // Ones stop counting after b so deeper levels only multiply branches.
                Key nk{e.child, k.ones + (d + 1 <= b && e.symbol == 1 ? 1 : 0), k.at_a};
                if (d + 1 == a) nk.at_a = nk.ones;
                next[nk] += mult;
            }
        cur = std::move(next);
    }
    std::map<std::pair<int, int>, long double> by_value;
    for (const auto& [k, mult] : cur) by_value[{k.at_a, k.ones}] += mult;
    long double total = 0, good = 0;
    out.min_oscillation = kPosInf;
    for (const auto& [v, mult] : by_value) {
        const double osc = std::abs(static_cast<double>(v.first) / a - static_cast<double>(v.second) / b);
        out.min_oscillation = std::min(out.min_oscillation, osc);
        total += mult;
        if (osc >= threshold) good += mult;
    }
    out.branches = total;
    out.fraction_at_least = total > 0 ? static_cast<double>(good / total) : 0.0;
    return out;
}

std::uint64_t suite_tree_seed(std::uint64_t seed, int index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

bool SuiteReport::all_passed() const {
    return non_vacuous && std::all_of(rows.begin(), rows.end(), [](const InvariantRow& r) { return r.pass; });
}

std::vector<std::pair<std::string, std::pair<int, int>>> SuiteReport::summary() const {
    std::vector<std::pair<std::string, std::pair<int, int>>> out;
    for (const auto& r : rows) {
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == r.invariant; });
        if (it == out.end()) {
            out.push_back({r.invariant, {0, 0}});
            it = out.end() - 1;
        }
        it->second.second += 1;
        if (r.pass) it->second.first += 1;
    }
    return out;
}

namespace {

// Exhaustive min over covering antichains and max over all antichains, by
// enumerating every antichain of a small explicit tree.
struct Choice {
    double weight;
    bool covers;
};

std::vector<Choice> enumerate_antichains(const CylinderTree& t, int d, ClassId c, double s, const NodeWeighting& cover,
                                         const NodeWeighting& pack, bool packing) {
    std::vector<Choice> combos{{0.0, true}};
    if (d == t.depth()) combos = {{0.0, false}};
    else
        for (const auto& e : t.children(d, c)) {
            const auto sub = enumerate_antichains(t, d + 1, e.child, s, cover, pack, packing);
            std::vector<Choice> next;
            next.reserve(combos.size() * sub.size());
            for (const auto& x : combos)
                for (const auto& y : sub) next.push_back({x.weight + y.weight, x.covers && y.covers});
            combos = std::move(next);
        }
    const auto& w = packing ? pack : cover;
    if (d >= w.min_depth) combos.push_back({std::exp(-s * w.exponent(d)), true});
    return combos;
}

struct Checker {
    int tree_index;
    std::uint64_t seed;
    std::vector<InvariantRow> rows;
    void add(const std::string& name, bool pass, double margin, const std::string& detail = {}) {
        rows.push_back({tree_index, seed, name, pass, margin, detail});
    }
};

double rel_log_gap(double a, double b) {
    if (a == b) return 0.0;
    return std::abs(std::expm1(a - b));
}

struct TreeOutcome {
    std::vector<InvariantRow> rows;
    double bowen = 0.0;
    double packing = 0.0;
    nlohmann::json tree_json;
};

TreeOutcome check_tree(int index, const SuiteOptions& opt) {
    const std::uint64_t seed = suite_tree_seed(opt.seed, index);
    const int D = opt.depth;
    Checker ck{index, seed, {}};
    const auto tree = random_pruned_tree(seed, D);
    TreeOutcome out;

    ck.add("reproducible", tree.same_nodes(random_pruned_tree(seed, D)), 0.0);

    // Tree duality over a grid.
    {
        double worst = 0.0;
        bool cert_ok = true;
        for (double s : {0.1, 0.3, 0.5, std::log(2.0), 1.0})
            for (int m = 1; m <= 2; ++m)
                for (int N = 1; N <= 3 && N + m <= D; ++N) {
                    const auto cut = min_cutset_value(tree, s, N, ScaleIndex(m), WeightMode::ball);
                    const auto flow = weighted_cover_value(tree, s, N, ScaleIndex(m), WeightMode::ball);
                    worst = std::max(worst, rel_log_gap(flow.log_value, cut.log_value));
                    cert_ok = cert_ok && certify_duality(tree, flow, cut).ok();
                }
        ck.add("duality_cutset_eq_flow", worst <= 1e-9, 1e-9 - worst, "max relative gap " + fmt(worst));
        ck.add("duality_certificate", cert_ok, 0.0);
    }

    // Entropy chain.
    const double tol = opt.tol;
    const auto hb = bowen_entropy(tree, ScaleIndex(1), tol);
    const auto hp = packing_entropy(tree, ScaleIndex(1), tol);
    const auto hu = capacity_entropy(tree, ScaleIndex(1), tol);
    const double slack = 1e-9 + 2.0 * tol;
    out.bowen = hb.value;
    out.packing = hp.value;
    ck.add("chain_bowen_le_packing", hb.value <= hp.value + slack, hp.value + slack - hb.value,
           "h^B=" + fmt(hb.value) + " h^P=" + fmt(hp.value));
    ck.add("chain_packing_le_capacity", hp.value <= hu.value + slack, hu.value + slack - hp.value,
           "h^P=" + fmt(hp.value) + " h^UC=" + fmt(hu.value));

    // Frostman bound and flow optimality.
    {
        bool ok = true, mass_ok = true;
        double worst = kNegInf;
        auto shared = std::make_shared<const CylinderTree>(tree);
        for (double s : {0.25, 0.5, 0.75})
            for (int N : {1, 3}) {
                const auto fr = frostman_measure(shared, s * std::log(2.0), N, ScaleIndex(1), WeightMode::ball);
                worst = std::max(worst, fr.log_max_ratio);
                ok = ok && fr.log_max_ratio <= std::log1p(1e-9);
                const auto cut = min_cutset_value(tree, s * std::log(2.0), N, ScaleIndex(1), WeightMode::ball);
                mass_ok = mass_ok && fr.measure.log_root_mass() == 0.0 && fr.measure.additivity_defect() <= 1e-12 &&
                          rel_log_gap(fr.log_c, cut.log_value) <= 1e-9;
            }
        ck.add("frostman_bound", ok, std::log1p(1e-9) - worst, "max log(c mu e^{sn}) = " + fmt(worst));
        ck.add("frostman_total_mass_and_c", mass_ok, 0.0);
    }

    // Monotonicity in N.
    {
        bool mono_m = true, mono_p = true;
        for (double s : {0.2, 0.5, 0.8}) {
            double prev_m = kNegInf, prev_p = kPosInf;
            for (int N = 1; N + 1 <= D; ++N) {
                const double vm = min_cutset_value(tree, s, N, ScaleIndex(1)).log_value;
                const double vp = max_antichain_value(tree, s, N, ScaleIndex(1)).log_value;
                mono_m = mono_m && vm >= prev_m - 1e-12;
                mono_p = mono_p && vp <= prev_p + 1e-12;
                prev_m = vm;
                prev_p = vp;
            }
        }
        ck.add("cutset_nondecreasing_in_N", mono_m, 0.0);
        ck.add("antichain_nonincreasing_in_N", mono_p, 0.0);
    }

    // Monotonicity in Z and the union bound.
    {
        const auto other = random_pruned_tree(seed ^ 0x5bd1e995ULL, D);
        const auto uni = union_tree({&tree, &other});
        bool mono = tree.is_subtree_of(uni);
        const auto ct = tree.log_depth_counts(), cu = uni.log_depth_counts();
        for (int d = 0; d <= D; ++d) mono = mono && ct[static_cast<std::size_t>(d)] <= cu[static_cast<std::size_t>(d)] + 1e-12;
        bool ubound = true;
        for (double s : {0.2, 0.5, 0.8})
            for (int N : {1, 4}) {
                const double a = min_cutset_value(tree, s, N, ScaleIndex(1)).log_value;
                const double b = min_cutset_value(other, s, N, ScaleIndex(1)).log_value;
                const double u = min_cutset_value(uni, s, N, ScaleIndex(1)).log_value;
                mono = mono && a <= u + 1e-12 &&
                       max_antichain_value(tree, s, N, ScaleIndex(1)).log_value <=
                           max_antichain_value(uni, s, N, ScaleIndex(1)).log_value + 1e-12;
                ubound = ubound && u <= log_add(a, b) + 1e-12;
            }
        ck.add("monotone_in_Z", mono, 0.0);
        ck.add("union_cutset_subadditive", ubound, 0.0);
        // Entropy of the union: if both parts are subcritical at s, each admissible
        // weight halves by s + log 2 / n_min.
        const auto hb2 = bowen_entropy(other, ScaleIndex(1), tol, {.N = std::nullopt, .diagnostics = false});
        const auto hbu = bowen_entropy(uni, ScaleIndex(1), tol, {.N = std::nullopt, .diagnostics = false});
        const auto w = cover_weighting(D, hb.N_used, ScaleIndex(1), WeightMode::depth);
        const double eslack = std::log(2.0) / w.exponent(w.min_depth) + 2.0 * tol;
        const double bound = std::max(hb.s_high, hb2.s_high) + eslack;
        ck.add("union_entropy_le_max", hbu.s_low <= bound, bound - hbu.s_low,
               "h(union)=" + fmt(hbu.value) + " max=" + fmt(std::max(hb.value, hb2.value)));
    }

    // DPs against exhaustive enumeration on the depth-3 truncation.
    {
        const auto small = tree.truncate(3);
        double worst = 0.0;
        for (double s : {0.1, 0.3, std::log(2.0), 1.0}) {
            const auto cw = cover_weighting(3, 1, ScaleIndex(1), WeightMode::ball);
            const auto pw = packing_weighting(3, 1, ScaleIndex(1), WeightMode::ball);
            const auto cuts = enumerate_antichains(small, 0, 0, s, cw, pw, false);
            const auto packs = enumerate_antichains(small, 0, 0, s, cw, pw, true);
            double best_cut = kPosInf, best_pack = 0.0;
            for (const auto& c : cuts)
                if (c.covers) best_cut = std::min(best_cut, c.weight);
            for (const auto& p : packs) best_pack = std::max(best_pack, p.weight);
            worst = std::max(worst, std::abs(min_cutset_weighted(small, s, cw).value() - best_cut) / best_cut);
            worst = std::max(worst, std::abs(max_antichain_weighted(small, s, pw).value() - best_pack) / best_pack);
        }
        ck.add("dp_matches_brute_force_d3", worst <= 1e-12, 1e-12 - worst, "max relative error " + fmt(worst));
    }

    // Regularized packing never exceeds the prepacking value.
    {
        bool ok = true;
        for (double s : {0.2, 0.5, 0.8}) {
            const auto pr = packing_regularized(tree, s, ScaleIndex(1), D / 2, D / 2, WeightMode::depth);
            ok = ok && pr.log_value <= pr.log_prepacking + 1e-12;
        }
        ck.add("regularized_le_prepacking", ok, 0.0);
    }

    // Increasing sets: 16 nested explicit subtrees exhaust the tree.
    {
        const auto leaves = tree.nodes(1 << 20);
        std::vector<Word> deepest;
        for (const auto& w : leaves)
            if (static_cast<int>(w.size()) == D) deepest.push_back(w);
        const int k = 16;
        double prev = kNegInf;
        bool mono = true;
        double last = 0.0;
        const double s = 0.5;
        for (int j = 1; j <= k; ++j) {
            const auto take = (deepest.size() * static_cast<std::size_t>(j) + k - 1) / k;
            const auto Ej = explicit_tree(tree.alphabet(), std::vector<Word>(deepest.begin(), deepest.begin() + static_cast<std::ptrdiff_t>(take)), D);
            last = min_cutset_value(Ej, s, 2, ScaleIndex(1), WeightMode::clopen).log_value;
            mono = mono && last >= prev - 1e-12;
            prev = last;
        }
        const double full = min_cutset_value(tree, s, 2, ScaleIndex(1), WeightMode::clopen).log_value;
        ck.add("increasing_sets_converge", mono && last == full, 0.0, "last=" + fmt(last) + " full=" + fmt(full));
    }

    out.rows = std::move(ck.rows);
    if (std::any_of(out.rows.begin(), out.rows.end(), [](const InvariantRow& r) { return !r.pass; }))
        out.tree_json = tree_to_json(tree);
    return out;
}

}  // namespace

SuiteReport run_property_suite(const SuiteOptions& opt) {
    if (opt.count < 1) throw DomainError("count must be >= 1");
    if (opt.depth < 4) throw DomainError("suite depth must be >= 4");
    SuiteReport rep;
    rep.options = opt;
    std::vector<TreeOutcome> outcomes(static_cast<std::size_t>(opt.count));
    std::atomic<int> next{0};
    std::mutex err_mu;
    std::string first_error;
    auto worker = [&] {
        for (int i = next++; i < opt.count; i = next++) {
            try {
                outcomes[static_cast<std::size_t>(i)] = check_tree(i, opt);
            } catch (const std::exception& e) {
                std::lock_guard lock(err_mu);
                if (first_error.empty()) first_error = "tree " + std::to_string(i) + ": " + e.what();
            }
        }
    };
    const int jobs = std::clamp(opt.jobs, 1, 256);
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (!first_error.empty()) throw DomainError(first_error);

    for (int i = 0; i < opt.count; ++i) {
        auto& o = outcomes[static_cast<std::size_t>(i)];
        const double sep = o.packing - o.bowen;
        if (rep.max_separation_tree < 0 || sep > rep.max_packing_minus_bowen) {
            rep.max_packing_minus_bowen = sep;
            rep.max_separation_tree = i;
        }
        for (const auto& r : o.rows)
            if (!r.pass)
                rep.counterexamples.push_back({{"tree_index", i},
                                               {"seed", r.seed},
                                               {"invariant", r.invariant},
                                               {"detail", r.detail},
                                               {"tree", o.tree_json}});
        rep.rows.insert(rep.rows.end(), o.rows.begin(), o.rows.end());
    }
    // Separating example: full binary top, single branch below.
    const auto adv = bushy_then_thin_tree(5, opt.depth);
    rep.adversarial_bowen = bowen_entropy(adv, ScaleIndex(1), opt.tol).value;
    rep.adversarial_packing = packing_entropy(adv, ScaleIndex(1), opt.tol).value;
    rep.non_vacuous = rep.max_packing_minus_bowen >= opt.separation &&
                      rep.adversarial_packing - rep.adversarial_bowen >= opt.separation;
    return rep;
}

}  // namespace varent
