#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "varent/engines.hpp"
#include "varent/entropy.hpp"
#include "varent/error.hpp"
#include "varent/exact.hpp"
#include "varent/generators.hpp"
#include "varent/verifier.hpp"

using namespace varent;

namespace {
const double ln2 = std::log(2.0);
const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
}  // namespace

TEST_CASE("min cutset examples") {
    CHECK(min_cutset_value(full_shift(2, 8), ln2, 1, ScaleIndex(1)).value() == doctest::Approx(2.0).epsilon(1e-12));
    for (double s : {0.3, 1.0}) {
        const auto v = min_cutset_value(single_branch(Alphabet(2), 10), s, 1, ScaleIndex(1));
        CHECK(v.log_value == doctest::Approx(-9 * s).epsilon(1e-12));
    }
    double lo = 1e9, hi = 0;
    for (int D = 12; D <= 16; ++D) {
        const double v = min_cutset_value(golden_mean_tree(D), std::log(phi), 1, ScaleIndex(1), WeightMode::clopen).value();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo >= 0.9);
    CHECK(hi <= 1.2);
    CHECK_THROWS_AS(min_cutset_value(full_shift(2, 3), 0.5, 3, ScaleIndex(1)), TruncationTooShallow);
    CHECK_THROWS_AS(min_cutset_value(full_shift(2, 3), -0.5, 1, ScaleIndex(1)), DomainError);
}

TEST_CASE("the chosen cutset is an antichain that covers every leaf") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto t = random_pruned_tree(seed, 10);
        const auto cut = min_cutset_value(t, 0.4, 2, ScaleIndex(1));
        const auto nodes = cut.nodes(t);
        double sum = 0.0;
        for (const auto& u : nodes) sum += std::exp(-0.4 * (static_cast<double>(u.size()) - 1));
        CHECK(std::log(sum) == doctest::Approx(cut.log_value).epsilon(1e-12));
        for (std::size_t i = 0; i < nodes.size(); ++i)
            for (std::size_t j = 0; j < nodes.size(); ++j)
                if (i != j) CHECK(!is_prefix(nodes[i], nodes[j]));
        for (const auto& leaf : t.nodes()) {
            if (static_cast<int>(leaf.size()) != t.depth()) continue;
            bool covered = false;
            for (const auto& u : nodes) covered |= is_prefix(u, leaf);
            CHECK(covered);
        }
    }
}

TEST_CASE("max antichain examples") {
    CHECK(max_antichain_value(full_shift(2, 10), ln2, 1, ScaleIndex(1)).value() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(max_antichain_value(full_shift(2, 10), 0.5, 1, ScaleIndex(1)).value() == doctest::Approx(1024 * std::exp(-5.0)).epsilon(1e-12));
    for (int N : {1, 3})
        CHECK(max_antichain_value(single_branch(Alphabet(2), 10), 0.7, N, ScaleIndex(1)).log_value ==
              doctest::Approx(-0.7 * N).epsilon(1e-12));
}

TEST_CASE("weighted cover examples") {
    const auto t = full_shift(2, 8);
    const auto f = weighted_cover_value(t, ln2, 1, ScaleIndex(1));
    CHECK(f.value() == doctest::Approx(2.0).epsilon(1e-12));
    for (const auto& u : t.truncate(5).nodes())
        CHECK(std::exp(f.log_node_flow(t, u)) == doctest::Approx(2.0 * std::pow(2.0, -static_cast<double>(u.size()))).epsilon(1e-12));
    CHECK(weighted_cover_value(single_branch(Alphabet(2), 10), 1.0, 2, ScaleIndex(1)).log_value == doctest::Approx(-9.0).epsilon(1e-12));
}

TEST_CASE("tree duality on random trees") {
    for (std::uint64_t seed = 100; seed < 160; ++seed) {
        const auto t = random_pruned_tree(seed, 12);
        for (double s : {0.1, 0.5, 1.0})
            for (int m = 1; m <= 2; ++m)
                for (int N : {1, 3}) {
                    const auto cut = min_cutset_value(t, s, N, ScaleIndex(m));
                    const auto flow = weighted_cover_value(t, s, N, ScaleIndex(m));
                    CHECK(std::abs(std::expm1(flow.log_value - cut.log_value)) <= 1e-9);
                    CHECK(certify_duality(t, flow, cut).ok());
                }
    }
}

TEST_CASE("exact rational DPs agree with exhaustive enumeration at D <= 4") {
    std::vector<CylinderTree> trees{full_shift(2, 4), golden_mean_tree(4), full_shift(2, 3), single_branch(Alphabet(2), 4)};
    for (std::uint64_t seed = 1; seed <= 12; ++seed) trees.push_back(random_pruned_tree(seed, 4));
    for (const auto& t : trees)
        for (double s : {0.1, 0.3, ln2, 1.0})
            for (int m = 1; m <= 2; ++m) {
                const auto x = exact::base_for(s);
                const auto cw = cover_weighting(t.depth(), 1, ScaleIndex(m), WeightMode::ball);
                const auto pw = packing_weighting(t.depth(), 1, ScaleIndex(m), WeightMode::ball);
                const auto bf = oracle::brute_force(t, x, cw, pw);
                CHECK(exact::min_cutset_value(t, x, cw) == bf.min_cut);
                CHECK(exact::max_antichain_value(t, x, pw) == bf.max_antichain);
                CHECK(exact::weighted_cover_value(t, x, cw) == bf.min_cut);
                CHECK(min_cutset_weighted(t, s, cw).value() == doctest::Approx(exact::to_double(exact::min_cutset_value(t, exact::base_for(s, 1LL << 40), cw))).epsilon(1e-9));
            }
    CHECK(exact::base_for(ln2) == exact::Rational(1, 2));
}

TEST_CASE("exact duality on larger random trees") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto t = random_pruned_tree(seed, 9);
        const auto x = exact::base_for(ln2);
        const auto w = cover_weighting(9, 2, ScaleIndex(1), WeightMode::ball);
        CHECK(exact::weighted_cover_value(t, x, w) == exact::min_cutset_value(t, x, w));
    }
}

TEST_CASE("monotonicity in N") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto t = random_pruned_tree(seed, 12);
        for (double s : {0.2, 0.6}) {
            for (int N = 1; N < 11; ++N) {
                CHECK(min_cutset_value(t, s, N, ScaleIndex(1)).log_value <= min_cutset_value(t, s, N + 1, ScaleIndex(1)).log_value + 1e-12);
                CHECK(max_antichain_value(t, s, N, ScaleIndex(1)).log_value >= max_antichain_value(t, s, N + 1, ScaleIndex(1)).log_value - 1e-12);
            }
        }
    }
}

TEST_CASE("monotonicity in Z and countable-union bound") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto a = random_pruned_tree(seed, 10), b = random_pruned_tree(seed + 1000, 10);
        const auto u = union_tree({&a, &b});
        const auto ca = a.depth_counts(), cu = u.depth_counts();
        for (std::size_t d = 0; d < ca.size(); ++d) CHECK(ca[d] <= cu[d]);
        for (double s : {0.2, 0.6})
            for (int N : {1, 4}) {
                const double ma = min_cutset_value(a, s, N, ScaleIndex(1)).log_value;
                const double mb = min_cutset_value(b, s, N, ScaleIndex(1)).log_value;
                const double mu = min_cutset_value(u, s, N, ScaleIndex(1)).log_value;
                CHECK(ma <= mu + 1e-12);
                CHECK(std::exp(mu) <= std::exp(ma) + std::exp(mb) + 1e-12);
                CHECK(max_antichain_value(a, s, N, ScaleIndex(1)).log_value <= max_antichain_value(u, s, N, ScaleIndex(1)).log_value + 1e-12);
            }
    }
}

TEST_CASE("increasing sets: clopen cutset value converges exactly to the union") {
    const auto t = random_pruned_tree(77, 10);
    std::vector<Word> leaves;
    for (const auto& w : t.nodes())
        if (w.size() == 10) leaves.push_back(w);
    double prev = -1e300, last = 0;
    for (int j = 1; j <= 16; ++j) {
        const auto take = (leaves.size() * static_cast<std::size_t>(j) + 15) / 16;
        const auto E = explicit_tree(Alphabet(2), std::vector<Word>(leaves.begin(), leaves.begin() + static_cast<std::ptrdiff_t>(take)), 10);
        last = min_cutset_value(E, 0.5, 2, ScaleIndex(1), WeightMode::clopen).log_value;
        CHECK(last >= prev - 1e-12);
        prev = last;
    }
    CHECK(last == min_cutset_value(t, 0.5, 2, ScaleIndex(1), WeightMode::clopen).log_value);
}

TEST_CASE("vitali selection") {
    SUBCASE("nested balls keep the larger") {
        std::vector<BowenBallSpec> balls{{Word{1, 1, 1, 1}, 1, ScaleIndex(2), BallKind::open},
                                         {Word{1, 1, 1, 1}, 1, ScaleIndex(1), BallKind::open}};
        const auto sel = vitali_select(balls);
        CHECK(sel.selected == std::vector<std::size_t>{1});
    }
    SUBCASE("disjoint cylinders are both kept") {
        std::vector<BowenBallSpec> balls{{Word{1, 1}, 1, ScaleIndex(1), BallKind::closed}, {Word{2, 1}, 1, ScaleIndex(1), BallKind::closed}};
        CHECK(vitali_select(balls).selected.size() == 2);
    }
    SUBCASE("mixed n is rejected") {
        std::vector<BowenBallSpec> balls{{Word{1, 1, 1}, 1, ScaleIndex(1), BallKind::open}, {Word{1, 1, 1}, 2, ScaleIndex(1), BallKind::open}};
        CHECK_THROWS_AS(vitali_select(balls), DomainError);
    }
    SUBCASE("random families: disjoint and covering at factor 1") {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<BowenBallSpec> balls;
            for (int i = 0; i < 50; ++i) {
                Word c(10);
                for (auto& s : c) s = static_cast<Symbol>(1 + rng() % 2);
                balls.push_back({c, 2, ScaleIndex(1 + static_cast<int>(rng() % 5)), BallKind::open});
            }
            const auto sel = vitali_select(balls);
            CHECK(sel.disjoint);
            CHECK(sel.covers_factor1);
            CHECK(sel.covers_factor5);
            // Independent membership sweep over all depth-10 words.
            for (std::uint32_t b = 0; b < 1024; ++b) {
                Word y(10);
                for (int i = 0; i < 10; ++i) y[static_cast<std::size_t>(i)] = static_cast<Symbol>(((b >> i) & 1u) + 1);
                int hits = 0;
                bool in_any = false;
                for (const auto& ball : balls) in_any |= ball.contains(y);
                for (auto i : sel.selected) hits += balls[i].contains(y) ? 1 : 0;
                CHECK(hits <= 1);
                if (in_any) CHECK(hits == 1);
            }
        }
    }
}

TEST_CASE("packing regularization") {
    const auto full = packing_regularized(full_shift(2, 8), ln2, ScaleIndex(1), 1, 3, WeightMode::ball);
    CHECK(std::exp(full.log_value) == doctest::Approx(1.0).epsilon(1e-12));
    const auto bushy = packing_regularized(bushy_then_thin_tree(5, 20), 0.1, ScaleIndex(1), 1, 5, WeightMode::ball);
    CHECK(bushy.log_value < bushy.log_prepacking - 1e-6);
    for (double s : {0.2, 0.9}) {
        // One branch: the only packing is one ball, shallowest at depth N'.
        const auto fixed = packing_regularized(single_branch(Alphabet(2), 20), s, ScaleIndex(1), 2, 10, WeightMode::ball, 2);
        CHECK(fixed.log_value == doctest::Approx(-2 * s).epsilon(1e-12));
        const auto free = packing_regularized(single_branch(Alphabet(2), 20), s, ScaleIndex(1), 2, 10, WeightMode::ball);
        CHECK(free.log_value == doctest::Approx(-10 * s).epsilon(1e-12));
    }
}

TEST_CASE("Bowen entropy") {
    for (int l : {2, 3}) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto e = bowen_entropy(full_shift(l, 24), ScaleIndex(1), 1e-3);
        CHECK(std::abs(e.value - std::log(static_cast<double>(l))) <= 1e-2);
        CHECK(e.s_low <= e.value);
        CHECK(e.value <= e.s_high);
        CHECK(e.s_high - e.s_low <= 1e-3);
        CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 10.0);
    }
    CHECK(bowen_entropy(single_branch(Alphabet(2), 24), ScaleIndex(1), 1e-3).value <= 1e-3);
    // Transfer-matrix oracle for the golden-mean shift.
    const double rho = oracle::spectral_radius({{0, 1}, {1, 1}});
    CHECK(std::abs(bowen_entropy(golden_mean_tree(24), ScaleIndex(1), 1e-3).value - std::log(rho)) <= 5e-2);
    const auto e = bowen_entropy(full_shift(2, 24), ScaleIndex(1), 1e-3);
    int log_m = 0;
    for (const auto& d : e.diagnostics) log_m += d.label == "log_M";
    CHECK(log_m == 3);
    CHECK_THROWS_AS(bowen_entropy(full_shift(2, 24), ScaleIndex(1), 0.0), DomainError);
}

TEST_CASE("packing and capacity entropy") {
    for (int l : {2, 3}) {
        CHECK(std::abs(packing_entropy(full_shift(l, 24), ScaleIndex(1), 1e-3).value - std::log(static_cast<double>(l))) <= 1e-2);
        CHECK(std::abs(capacity_entropy(full_shift(l, 24), ScaleIndex(1), 1e-3).value - std::log(static_cast<double>(l))) <= 1e-2);
    }
    CHECK(packing_entropy(single_branch(Alphabet(2), 24), ScaleIndex(1), 1e-3).value <= 1e-3);
    // Density oracle: limsup over d of (1/d) log c_d, free positions counted directly.
    double oracle_value = 0.0;
    for (int d = 256; d <= 1024; ++d) oracle_value = std::max(oracle_value, oracle::free_positions_upto(d) * std::log(2.0) / d);
    const auto ud = upper_density_tree(1024);
    CHECK(std::abs(packing_entropy(ud, ScaleIndex(1), 1e-3).value - oracle_value) <= 0.05);
    CHECK(std::abs(capacity_entropy(ud, ScaleIndex(1), 1e-3).value - oracle_value) <= 0.05);
    CHECK(std::abs(oracle_value - 2.0 / 3.0 * std::log(2.0)) <= 0.01);
}

TEST_CASE("separated sets are depth-(n+m-1) node sets") {
    // full_shift(2), m = 2, n = 3: 16 words of length 4 are pairwise (3, e^{-2})-separated.
    std::vector<Word> pts;
    for (std::uint32_t b = 0; b < 16; ++b) {
        Word w(6, 1);
        for (int i = 0; i < 4; ++i) w[static_cast<std::size_t>(i)] = static_cast<Symbol>(((b >> i) & 1u) + 1);
        pts.push_back(w);
    }
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) CHECK(dn_distance(pts[i], pts[j], 3) > std::exp(-2.0));
    const auto e = capacity_entropy(full_shift(2, 8), ScaleIndex(2), 1e-3, {.N = 1});
    bool found = false;
    for (const auto& d : e.diagnostics)
        if (d.label == "slope" && d.N == 3) {
            CHECK(std::exp(d.value) == doctest::Approx(16.0));
            found = true;
        }
    CHECK(found);
}

TEST_CASE("chain inequality on random trees: Bowen <= packing") {
    for (int i = 0; i < 200; ++i) {
        const auto t = random_pruned_tree(suite_tree_seed(42, i), 12);
        const double tol = 1e-4;
        const auto b = bowen_entropy(t, ScaleIndex(1), tol), p = packing_entropy(t, ScaleIndex(1), tol);
        CHECK(b.value <= p.value + 2 * tol + 1e-9);
    }
}

TEST_CASE("chain inequality on random trees: packing <= capacity") {
    int violations = 0;
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const auto t = random_pruned_tree(suite_tree_seed(42, i), 12);
        const double tol = 1e-4;
        const auto p = packing_entropy(t, ScaleIndex(1), tol), u = capacity_entropy(t, ScaleIndex(1), tol);
        if (p.value > u.value + 2 * tol + 1e-9) {
            ++violations;
            worst = std::max(worst, p.value - u.value);
        }
    }
    INFO("violations " << violations << ", worst excess " << worst);
    CHECK(violations == 0);
}

TEST_CASE("equality on full trees") {
    const double tol = 1e-3;
    for (const auto& t : {full_shift(2, 24), full_shift(3, 24)}) {
        const auto b = bowen_entropy(t, ScaleIndex(1), tol), p = packing_entropy(t, ScaleIndex(1), tol),
                   u = capacity_entropy(t, ScaleIndex(1), tol);
        CHECK(std::abs(b.value - p.value) <= 2 * tol);
        CHECK(std::abs(p.value - u.value) <= 2 * tol);
    }
}

TEST_CASE("equality on the golden-mean SFT") {
    const double tol = 1e-3;
    for (const auto& t : {golden_mean_tree(24)}) {
        const auto b = bowen_entropy(t, ScaleIndex(1), tol), p = packing_entropy(t, ScaleIndex(1), tol),
                   u = capacity_entropy(t, ScaleIndex(1), tol);
        CHECK(std::abs(b.value - p.value) <= 2 * tol);
        CHECK(std::abs(p.value - u.value) <= 2 * tol);
    }
}

TEST_CASE("homogeneous closed form agrees with bisection") {
    for (const auto& t : {full_shift(2, 24), upper_density_tree(256)}) {
        const auto w = cover_weighting(t.depth(), t.depth() / 2, ScaleIndex(1), WeightMode::depth);
        const auto e = bowen_entropy(t, ScaleIndex(1), 1e-6);
        CHECK(std::abs(homogeneous_critical(t, w, false) - e.value) <= 1e-5);
    }
    CHECK_THROWS_AS(homogeneous_critical(random_pruned_tree(3, 8), cover_weighting(8, 2, ScaleIndex(1), WeightMode::ball), false),
                    DomainError);
}
