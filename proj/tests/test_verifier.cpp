#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "varent/error.hpp"
#include "varent/generators.hpp"
#include "varent/verifier.hpp"

using namespace varent;

namespace {
const double ln2 = std::log(2.0);
std::shared_ptr<const CylinderTree> share(CylinderTree t) { return std::make_shared<const CylinderTree>(std::move(t)); }
}  // namespace

TEST_CASE("Besicovitch trees") {
    CHECK(besicovitch_tree({0.5, 0.5}, 0.5, 10).same_nodes(full_shift(2, 10)));
    const auto t = besicovitch_tree({0.2, 0.8}, 0.05, 26);
    double expect = 0.0;
    for (int k = 0; k <= 26; ++k)
        if (std::abs(k / 26.0 - 0.2) <= 0.05 + 1e-12) expect += oracle::binomial(26, k);
    CHECK(static_cast<double>(t.depth_counts()[26]) == expect);
    CHECK(besicovitch_tree({1.0, 0.0}, 0.0, 12).same_nodes(single_branch(Alphabet(2), 12)));
    CHECK_THROWS_AS(besicovitch_tree({0.5, 0.5}, 0.01, 5), InfeasibleError);
    // Monotone in delta.
    for (double d : {0.02, 0.05, 0.1, 0.2})
        CHECK(besicovitch_tree({0.3, 0.7}, d, 20).is_subtree_of(besicovitch_tree({0.3, 0.7}, d + 0.03, 20)));
}

TEST_CASE("Bowen variational report") {
    const auto full = verify_bowen_vp(share(full_shift(2, 26)), ScaleIndex(1), 1e-3);
    CHECK(std::abs(full.entropy.value - ln2) <= 0.05);
    CHECK(std::abs(full.measure_side - ln2) <= 0.05);
    CHECK(full.gap <= 0.05);
    CHECK(full.passed());

    const auto single = verify_bowen_vp(share(single_branch(Alphabet(2), 26)), ScaleIndex(1), 1e-3);
    CHECK(single.entropy.value <= 1e-3);
    CHECK(single.measure_side <= 1e-9);

    const double h = oracle::entropy_nats({0.2, 0.8});
    const auto besi = verify_bowen_vp(share(besicovitch_tree({0.2, 0.8}, 0.05, 26)), ScaleIndex(1), 1e-3);
    CHECK(std::abs(besi.entropy.value - h) <= 0.05);
    CHECK(std::abs(besi.measure_side - h) <= 0.05);
    CHECK(besi.gap <= 0.05);
}

TEST_CASE("easy direction: measure side never exceeds the entropy bracket") {
    const double h = 1e-3;
    for (const auto& t : {full_shift(2, 26), golden_mean_tree(26), besicovitch_tree({0.2, 0.8}, 0.05, 26), single_branch(Alphabet(2), 26)}) {
        const auto r = verify_bowen_vp(share(t), ScaleIndex(1), h);
        INFO("measure side " << r.measure_side << " vs s_high " << r.entropy.s_high);
        CHECK(r.measure_side <= r.entropy.s_high + 1e-9 + h);
    }
    for (const auto& t : {full_shift(2, 64), upper_density_tree(1024)}) {
        const auto r = verify_packing_vp(share(t), ScaleIndex(1), h, 3);
        INFO("measure side " << r.measure_side << " vs s_high " << r.entropy.s_high);
        CHECK(r.measure_side <= r.entropy.s_high + 1e-9 + h);
    }
}

TEST_CASE("packing variational report") {
    const auto full = verify_packing_vp(share(full_shift(2, 64)), ScaleIndex(1), 1e-3, 3);
    CHECK(std::abs(full.entropy.value - ln2) <= 0.05);
    CHECK(std::abs(full.measure_side - ln2) <= 0.05);
    CHECK(!full.flagged);

    const auto ud = verify_packing_vp(share(upper_density_tree(1024)), ScaleIndex(1), 1e-3, 3);
    CHECK(std::abs(ud.entropy.value - 2.0 / 3.0 * ln2) <= 0.05);
    double pf_value = -1.0;
    for (const auto& m : ud.measures)
        if (m.name == "packing_frostman" && m.feasible) pf_value = m.value;
    CHECK(std::abs(pf_value - ud.entropy.value) <= 0.05);
    CHECK(ud.passed());

    const auto single = verify_packing_vp(share(single_branch(Alphabet(2), 26)), ScaleIndex(1), 1e-3, 3);
    CHECK(single.entropy.value <= 1e-3);
    CHECK(single.measure_side <= 1e-9);
    CHECK(single.flagged);
}

TEST_CASE("nontypical tree") {
    const double s = 0.5 * ln2;
    const auto nt = nontypical_tree(2, s, 2048);
    const auto e = bowen_entropy(nt.tree, ScaleIndex(1), 1e-3);
    CHECK(e.value >= 0.30);
    CHECK(e.value <= 0.40);
    // Analytic block-density formula from the schedule metadata.
    double logc = 0.0;
    for (const auto& b : nt.schedule.blocks) logc += oracle::log_binomial(b.length, b.ones) + (b.length - b.ones) * std::log(nt.other_symbols);
    CHECK(logc / 2048 == doctest::Approx(nt.schedule_entropy).epsilon(1e-9));
    CHECK(std::abs(logc / 2048 - s) <= 0.05);
    CHECK(std::abs(nt.tree.log_depth_counts()[2048] - logc) <= 1e-6 * logc);
    const auto& cp = nt.checkpoints;
    CHECK(cp.back() == 2048);
    const auto osc = checkpoint_oscillation(nt.tree, cp[cp.size() - 2], cp.back());
    CHECK(osc.min_oscillation >= 0.2);
    CHECK(osc.fraction_at_least == 1.0);

    const auto zero = nontypical_tree(2, 0.0, 2048);
    const auto ez = bowen_entropy(zero.tree, ScaleIndex(1), 1e-3);
    CHECK(ez.s_low >= 0.0);
    CHECK(ez.s_high <= 0.02);
    CHECK(checkpoint_oscillation(zero.tree, zero.checkpoints[zero.checkpoints.size() - 2], 2048).min_oscillation >= 0.2);

    try {
        nontypical_tree(2, 0.69, 2048);
        FAIL("expected infeasible");
    } catch (const InfeasibleError& err) {
        CHECK(std::string(err.what()).find("D") != std::string::npos);
    }
    CHECK_THROWS_AS(nontypical_tree(2, ln2, 2048), DomainError);
}

TEST_CASE("checkpoint oscillation on a hand-built tree") {
    // Branches 11 22 and 22 11, plus 12 12.
    const auto t = explicit_tree(Alphabet(2), {Word{1, 1, 2, 2}, Word{2, 2, 1, 1}, Word{1, 2, 1, 2}}, 4);
    const auto osc = checkpoint_oscillation(t, 2, 4, 0.2);
    CHECK(osc.min_oscillation == doctest::Approx(0.0));
    CHECK(osc.fraction_at_least == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("property suite is reproducible") {
    SuiteOptions o;
    o.count = 12;
    o.depth = 10;
    const auto a = run_property_suite(o);
    o.jobs = 3;
    const auto b = run_property_suite(o);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].invariant == b.rows[i].invariant);
        CHECK(a.rows[i].pass == b.rows[i].pass);
        CHECK(a.rows[i].margin == b.rows[i].margin);
        CHECK(a.rows[i].detail == b.rows[i].detail);
    }
}

TEST_CASE("property suite, seed 42, 200 trees, depth 12") {
    SuiteOptions o;
    const auto rep = run_property_suite(o);
    for (const auto& [name, pc] : rep.summary()) {
        INFO(name << ": " << pc.first << "/" << pc.second);
        CHECK(pc.first == pc.second);
    }
    CHECK(rep.non_vacuous);
    CHECK(rep.adversarial_packing - rep.adversarial_bowen >= 0.1);
}

TEST_CASE("chain equality on the full shift") {
    const double tol = 1e-3;
    const auto t = full_shift(2, 24);
    const auto b = bowen_entropy(t, ScaleIndex(1), tol), p = packing_entropy(t, ScaleIndex(1), tol), u = capacity_entropy(t, ScaleIndex(1), tol);
    CHECK(std::abs(b.value - p.value) <= 2 * tol);
    CHECK(std::abs(p.value - u.value) <= 2 * tol);
}
