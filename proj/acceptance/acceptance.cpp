// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "varent/engines.hpp"
#include "varent/entropy.hpp"
#include "varent/error.hpp"
#include "varent/exact.hpp"
#include "varent/frostman.hpp"
#include "varent/generators.hpp"
#include "varent/measure.hpp"
#include "varent/verifier.hpp"
#include "oracles.hpp"

using namespace varent;

namespace {

// Every tolerance used below.
constexpr double kFullShiftTol = 1e-2;
constexpr double kFullShiftSeconds = 10.0;
constexpr double kDualityRelTol = 1e-9;
constexpr double kDualitySeconds = 60.0;
constexpr double kChainTol = 1e-4;            // bisection tolerance of each estimate
constexpr double kChainSlack = 2 * kChainTol + 1e-9;
constexpr double kSeparation = 0.1;
constexpr double kFrostmanSlack = 1e-9;
constexpr double kTotalMassTol = 1e-12;       // floating-point total; the rational total must be exactly 1
constexpr double kVPGap = 0.05;
constexpr double kVPTol = 1e-3;
constexpr double kBesicovitchTol = 0.05;
constexpr double kPackingMargin = 0.03;       // packing-Frostman exponent is (1 - margin) s_low
constexpr double kNontypicalTol = 0.05;
constexpr double kOscillation = 0.2;
constexpr double kBrinKatokTol = 0.02;
constexpr double kLogSlack = 1e-12;

constexpr int kSuiteTrees = 200;
constexpr int kSuiteDepth = 12;
constexpr std::uint64_t kSuiteSeed = 42;

const double ln2 = std::log(2.0);

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::shared_ptr<const CylinderTree>> suite_trees() {
    std::vector<std::shared_ptr<const CylinderTree>> out;
    for (int i = 0; i < kSuiteTrees; ++i)
        out.push_back(std::make_shared<const CylinderTree>(random_pruned_tree(suite_tree_seed(kSuiteSeed, i), kSuiteDepth)));
    return out;
}

const std::vector<double> kGridS{0.1, 0.3, 0.5, std::log(2.0), 1.0};

void criterion1() {
    bool ok = true;
    double worst = 0.0, slowest = 0.0;
    for (int l : {2, 3})
        for (int m : {1, 2}) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto t = full_shift(l, 24);
            const double b = bowen_entropy(t, ScaleIndex(m), 1e-3).value;
            const double p = packing_entropy(t, ScaleIndex(m), 1e-3).value;
            const double u = capacity_entropy(t, ScaleIndex(m), 1e-3).value;
            const double secs = seconds_since(t0);
            const double err = std::max({std::abs(b - std::log(l)), std::abs(p - std::log(l)), std::abs(u - std::log(l))});
            worst = std::max(worst, err);
            slowest = std::max(slowest, secs);
            ok = ok && err <= kFullShiftTol && secs <= kFullShiftSeconds;
        }
    report(1, ok, fmt("full shift l in {2,3}, m in {1,2}, D=24: max |h - ln l| = %.2e (tol %.0e), slowest case %.2fs", worst, kFullShiftTol, slowest));
}

void criterion2(const std::vector<std::shared_ptr<const CylinderTree>>& trees) {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    long checks = 0;
    for (const auto& t : trees)
        for (double s : kGridS)
            for (int N : {1, 2, 3})
                for (int m : {1, 2}) {
                    const double cut = min_cutset_value(*t, s, N, ScaleIndex(m), WeightMode::ball).log_value;
                    const double flow = weighted_cover_value(*t, s, N, ScaleIndex(m), WeightMode::ball).log_value;
                    worst = std::max(worst, std::abs(flow - cut) / std::max(1.0, std::abs(cut)));
                    ++checks;
                }
    const double secs = seconds_since(t0);
    report(2, worst <= kDualityRelTol && secs <= kDualitySeconds,
           fmt("%ld (tree, s, N, m) cases: max relative log gap %.2e (tol %.0e), %.2fs", checks, worst, kDualityRelTol, secs));
}

void criterion3(const std::vector<std::shared_ptr<const CylinderTree>>& trees) {
    int bp_viol = 0, pu_viol = 0;
    double worst_bp = -1e9, worst_pu = -1e9, best_sep = 0.0;
    for (const auto& t : trees) {
        const double b = bowen_entropy(*t, ScaleIndex(1), kChainTol).value;
        const double p = packing_entropy(*t, ScaleIndex(1), kChainTol).value;
        const double u = capacity_entropy(*t, ScaleIndex(1), kChainTol).value;
        worst_bp = std::max(worst_bp, b - p);
        worst_pu = std::max(worst_pu, p - u);
        if (b - p > kChainSlack) ++bp_viol;
        if (p - u > kChainSlack) ++pu_viol;
        best_sep = std::max(best_sep, p - b);
    }
    const bool ok = bp_viol == 0 && pu_viol == 0 && best_sep >= kSeparation;
    report(3, ok, fmt("B<=P violated on %d/%d (max B-P %.4f), P<=UC violated on %d/%d (max P-UC %.4f), slack %.1e; max P-B %.3f (need >= %.1f)",
                      bp_viol, kSuiteTrees, worst_bp, pu_viol, kSuiteTrees, worst_pu, kChainSlack, best_sep, kSeparation));
}

void criterion4(const std::vector<std::shared_ptr<const CylinderTree>>& trees) {
    double worst_ratio = -1e300, worst_total = 0.0;
    int measures = 0, exact_runs = 0;
    bool exact_ok = true;
    for (const auto& t : trees) {
        const auto nodes = t->nodes();
        const int D = t->depth();
        for (double s : kGridS)
            for (int N : {1, 2, 3})
                for (int m : {1, 2}) {
                    const auto fr = frostman_measure(t, s, N, ScaleIndex(m), WeightMode::ball);
                    ++measures;
                    const double c = std::exp(fr.log_c);
                    double total = 0.0;
                    for (const auto& u : nodes) {
                        const int d = static_cast<int>(u.size());
                        if (d == D) total += fr.measure.mass(u);
                        // Admissible: open ball cylinder length n + m with n >= N.
                        if (d < N + m) continue;
                        const double ratio = c * fr.measure.mass(u) * std::exp(s * (d - m));
                        worst_ratio = std::max(worst_ratio, ratio);
                    }
                    worst_total = std::max(worst_total, std::abs(total - 1.0));
                }
        const auto ex = t->expand();
        for (int N : {1, 2, 3})
            for (int m : {1, 2}) {
                const auto w = cover_weighting(D, N, ScaleIndex(m), WeightMode::ball);
                const auto fm = exact::frostman_masses(ex, exact::Rational(1, 2), w);
                exact::Rational total = 0;
                for (const auto& mass : fm.mass[static_cast<std::size_t>(D)]) total += mass;
                exact_ok = exact_ok && total == 1;
                ++exact_runs;
            }
    }
    const bool ok = worst_ratio <= 1.0 + kFrostmanSlack && worst_total <= kTotalMassTol && exact_ok;
    report(4, ok, fmt("%d measures: max c*mu(u)*e^{s(|u|-m)} = %.12f (bound 1 + %.0e), max |mu(boundary) - 1| = %.1e; exact rational total == 1 in %s of %d runs",
                      measures, worst_ratio, kFrostmanSlack, worst_total, exact_ok ? "all" : "NOT all", exact_runs));
}

void criterion5() {
    const double h = oracle::entropy_nats({0.2, 0.8});
    struct Case {
        const char* name;
        CylinderTree tree;
    };
    std::vector<Case> cases;
    cases.push_back({"full shift", full_shift(2, 26)});
    cases.push_back({"golden mean", golden_mean_tree(26)});
    cases.push_back({"Besicovitch (0.2,0.8)", besicovitch_tree({0.2, 0.8}, 0.05, 26)});
    bool ok = true;
    std::string detail;
    for (auto& c : cases) {
        const auto r = verify_bowen_vp(std::make_shared<const CylinderTree>(std::move(c.tree)), ScaleIndex(1), kVPTol);
        ok = ok && r.gap <= kVPGap;
        detail += fmt("%s: h^B %.4f side %.4f gap %.4f%s; ", c.name, r.entropy.value, r.measure_side, r.gap,
                      r.easy_direction_ok ? "" : " (side above bracket)");
        if (std::string(c.name).rfind("Besicovitch", 0) == 0) {
            ok = ok && std::abs(r.entropy.value - h) <= kBesicovitchTol;
            detail += fmt("oracle -sum p ln p = %.4f, |h^B - oracle| = %.4f (tol %.2f)", h, std::abs(r.entropy.value - h), kBesicovitchTol);
        }
    }
    report(5, ok, detail);
}

void criterion6() {
    double C = 1.0;
    for (int n = 1; n <= 200; ++n) C *= 1.0 + std::ldexp(1.0, -n);
    bool ok = true;
    std::string detail = fmt("C = %.6f; ", C);
    struct Case {
        const char* name;
        CylinderTree tree;
    };
    std::vector<Case> cases;
    cases.push_back({"full shift D=64", full_shift(2, 64)});
    cases.push_back({"upper density D=1024", upper_density_tree(1024)});
    for (auto& c : cases) {
        const auto t = std::make_shared<const CylinderTree>(std::move(c.tree));
        const auto r = verify_packing_vp(t, ScaleIndex(1), kVPTol, 3);
        ok = ok && r.gap <= kVPGap;
        detail += fmt("%s: h^P %.4f side %.4f gap %.4f", c.name, r.entropy.value, r.measure_side, r.gap);
        // Independent sweep of the staged construction's selected nodes.
        const double s = (1.0 - kPackingMargin) * r.entropy.s_low;
        bool built = false;
        for (int k = 3; k >= 1 && !built; --k) {
            try {
                const auto pf = packing_frostman(*t, s, ScaleIndex(1), k, {1, WeightMode::depth});
                built = true;
                double worst = -1e300;
                for (const auto& g : pf.groups) worst = std::max(worst, g.log_final_mass - (std::log(C) - s * g.depth));
                const bool bound = worst <= kLogSlack;
                ok = ok && bound;
                detail += fmt(", %d stages, %zu groups, max log(mass/(C e^{-s n})) = %.3e; ", k, pf.groups.size(), worst);
            } catch (const InfeasibleError&) {
            }
        }
        if (!built) {
            ok = false;
            detail += ", no feasible stage; ";
        }
    }
    report(6, ok, detail);
}

void criterion7() {
    const double target = 0.5 * ln2;
    const auto nt = nontypical_tree(2, target, 2048);
    const auto e = bowen_entropy(nt.tree, ScaleIndex(1), 1e-3);
    bool ok = e.s_low >= target - kNontypicalTol && e.s_high <= target + kNontypicalTol;
    std::string detail = fmt("bracket [%.4f, %.4f] vs %.4f; ", e.s_low, e.s_high, target);
    // Cutset DP at increasing depth.
    for (int D : {512, 1024}) {
        const auto v = bowen_entropy(nt.tree.truncate(D), ScaleIndex(1), 1e-3).value;
        ok = ok && std::abs(v - target) <= kNontypicalTol;
        detail += fmt("D=%d: %.4f; ", D, v);
    }
    // Block-density formula: log of the number of depth-D words.
    double logc = 0.0;
    for (const auto& b : nt.schedule.blocks) logc += oracle::log_binomial(b.length, b.ones) + (b.length - b.ones) * std::log(nt.other_symbols);
    ok = ok && std::abs(logc / 2048 - target) <= kNontypicalTol;
    detail += fmt("analytic %.4f; ", logc / 2048);
    const auto& cp = nt.checkpoints;
    const auto osc = checkpoint_oscillation(nt.tree, cp[cp.size() - 2], cp.back(), kOscillation);
    ok = ok && osc.fraction_at_least == 1.0;
    detail += fmt("oscillation >= %.1f on %.1f%% of branches (min %.3f)", kOscillation, 100.0 * osc.fraction_at_least, osc.min_oscillation);
    report(7, ok, detail);
}

void criterion8() {
    constexpr int k = 16, D = 10;
    bool ok = true;
    int chains = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto E = random_pruned_tree(seed, D);
        std::vector<Word> leaves;
        for (const auto& w : E.nodes())
            if (static_cast<int>(w.size()) == D) leaves.push_back(w);
        const auto w = cover_weighting(D, 2, ScaleIndex(1), WeightMode::clopen);
        const auto target = exact::min_cutset_value(E, exact::Rational(1, 2), w);
        exact::Rational prev = 0;
        for (int j = 1; j <= k; ++j) {
            const auto take = (leaves.size() * static_cast<std::size_t>(j) + k - 1) / k;
            const auto Ej = explicit_tree(Alphabet(2), std::vector<Word>(leaves.begin(), leaves.begin() + static_cast<std::ptrdiff_t>(take)), D);
            const auto v = exact::min_cutset_value(Ej, exact::Rational(1, 2), w);
            ok = ok && v >= prev && v <= target;
            prev = v;
            if (j == k) {
                ok = ok && v == target;
                ok = ok && min_cutset_value(Ej, ln2, 2, ScaleIndex(1), WeightMode::clopen).log_value ==
                               min_cutset_value(E, ln2, 2, ScaleIndex(1), WeightMode::clopen).log_value;
            }
        }
        ++chains;
    }
    report(8, ok, fmt("%d chains of %d nested subtrees, D=%d: clopen cutset values nondecreasing and equal to the union at step %d (exact rational and log-domain)", chains, k, D, k));
}

void criterion9() {
    std::vector<CylinderTree> trees{full_shift(2, 4), full_shift(2, 3), golden_mean_tree(4), single_branch(Alphabet(2), 4)};
    for (std::uint64_t seed = 1; seed <= 30; ++seed) trees.push_back(random_pruned_tree(seed, 2 + static_cast<int>(seed % 3)));
    int cases = 0, mismatches = 0;
    for (const auto& t : trees)
        for (double s : {0.1, 0.3, ln2, 1.0})
            for (int m : {1, 2})
                for (int N : {1, 2}) {
                    if (N + m > t.depth()) continue;
                    const auto x = exact::base_for(s);
                    const auto cw = cover_weighting(t.depth(), N, ScaleIndex(m), WeightMode::ball);
                    const auto pw = packing_weighting(t.depth(), N, ScaleIndex(m), WeightMode::ball);
                    const auto bf = oracle::brute_force(t, x, cw, pw);
                    if (exact::min_cutset_value(t, x, cw) != bf.min_cut) ++mismatches;
                    if (exact::weighted_cover_value(t, x, cw) != bf.min_cut) ++mismatches;
                    if (exact::max_antichain_value(t, x, pw) != bf.max_antichain) ++mismatches;
                    ++cases;
                }
    report(9, mismatches == 0 && cases > 0, fmt("%d cases at D <= 4: %d mismatches against exhaustive enumeration (exact rational)", cases, mismatches));
}

void criterion10() {
    constexpr int branches = 100, n_max = 10'000;
    const double h = oracle::entropy_nats({0.2, 0.8});
    const double p[] = {0.2, 0.8};
    const auto mu = bernoulli(std::make_shared<const CylinderTree>(full_shift(2, n_max + 1)), p);
    std::mt19937_64 rng(20240601);
    double lower = 0.0, upper = 0.0;
    int individually = 0;
    for (int i = 0; i < branches; ++i) {
        const auto est = local_entropy(mu, mu.sample_branch(rng), ScaleIndex(1), n_max);
        lower += est.liminf_estimate / branches;
        upper += est.limsup_estimate / branches;
        if (std::abs(est.liminf_estimate - h) <= kBrinKatokTol && std::abs(est.limsup_estimate - h) <= kBrinKatokTol) ++individually;
    }
    const bool ok = std::abs(lower - h) <= kBrinKatokTol && std::abs(upper - h) <= kBrinKatokTol && std::abs(upper - lower) <= kBrinKatokTol;
    report(10, ok, fmt("%d branches, n_max=%d: lower %.4f upper %.4f vs %.4f (tol %.2f); %d/%d branches within tol on both", branches,
                       n_max, lower, upper, h, kBrinKatokTol, individually, branches));
}

}  // namespace

int main() {
    const auto trees = suite_trees();
    criterion1();
    criterion2(trees);
    criterion3(trees);
    criterion4(trees);
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
