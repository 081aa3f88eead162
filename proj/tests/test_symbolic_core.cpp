#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "varent/error.hpp"
#include "varent/generators.hpp"
#include "varent/tree.hpp"
#include "varent/tree_io.hpp"
#include "varent/word.hpp"

using namespace varent;

namespace {

Word word_of(std::uint32_t bits, int len) {
    Word w(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) w[static_cast<std::size_t>(i)] = static_cast<Symbol>(((bits >> i) & 1u) + 1);
    return w;
}

std::size_t prefix_len(const Word& a, const Word& b) {
    return static_cast<std::size_t>(std::mismatch(a.begin(), a.end(), b.begin(), b.end()).first - a.begin());
}

}  // namespace

TEST_CASE("alphabet and words") {
    CHECK_THROWS_AS(Alphabet(1), DomainError);
    CHECK_THROWS_AS(Alphabet(36), DomainError);
    Alphabet a(12);
    CHECK(format_word(parse_word("19ab", a)) == "19ab");
    CHECK(parse_word("1a", a) == Word{1, 10});
    CHECK(parse_word("1c", a) == Word{1, 12});
    CHECK_THROWS_AS(parse_word("1d", a), DomainError);
    CHECK_THROWS_AS(parse_word("0", a), DomainError);
    CHECK_THROWS_AS(ScaleIndex(0), DomainError);
    CHECK(ScaleIndex(3).radius() == doctest::Approx(std::exp(-3.0)));
}

TEST_CASE("ball cylinder length") {
    CHECK(ball_cylinder_length(1, ScaleIndex(1), BallKind::open) == 2);
    CHECK(ball_cylinder_length(1, ScaleIndex(1), BallKind::closed) == 1);
    CHECK(ball_cylinder_length(5, ScaleIndex(3), BallKind::closed) == 7);
    // Exhaustive metric check at depth 6 for the first two cases.
    for (std::uint32_t a = 0; a < 64; ++a)
        for (std::uint32_t b = 0; b < 64; ++b) {
            const auto x = word_of(a, 6), y = word_of(b, 6);
            const double d1 = dn_distance(x, y, 1);
            CHECK((d1 < std::exp(-1.0)) == (prefix_len(x, y) >= 2));
            CHECK((d1 <= std::exp(-1.0)) == (prefix_len(x, y) >= 1));
        }
}

TEST_CASE("dn distance examples") {
    CHECK(dn_distance(Word{1, 1, 1, 1}, Word{1, 1, 1, 1}, 2) == 0.0);
    CHECK(dn_distance(Word{1, 2, 1, 2}, Word{1, 2, 1, 1}, 2) == doctest::Approx(std::exp(-2.0)));
    CHECK_THROWS_AS(dn_distance(Word{1, 2}, Word{1, 2, 1}, 2), InsufficientPrefix);
    CHECK_THROWS_AS(dn_distance(Word{1, 2}, Word{1, 2}, 3), InsufficientPrefix);
    CHECK_THROWS_AS(dn_distance(Word{1, 1, 1}, Word{1, 1, 2}, 4), InsufficientPrefix);
}

TEST_CASE("dn distance matches the cylinder-length law on all depth-8 pairs") {
    int checked = 0;
    for (std::uint32_t a = 0; a < 256; ++a)
        for (std::uint32_t b = 0; b < 256; ++b) {
            if (a == b) continue;
            const auto x = word_of(a, 8), y = word_of(b, 8);
            const int c = static_cast<int>(prefix_len(x, y));
            for (int n = 1; n <= 4; ++n) {
                if (c < n) continue;
                const double d = dn_distance(x, y, n);
                if (std::abs(d - std::exp(-(c - n + 1.0))) > 1e-15) FAIL("mismatch at " << a << "," << b << " n=" << n);
                ++checked;
            }
        }
    CHECK(checked > 0);
}

TEST_CASE("Bowen ball membership equals cylinder membership") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 48; ++trial) {
        const auto x = word_of(static_cast<std::uint32_t>(rng() & 1023u), 10);
        for (std::uint32_t b = 0; b < 1024; ++b) {
            const auto y = word_of(b, 10);
            const int c = static_cast<int>(prefix_len(x, y));
            for (int n = 1; n <= 4; ++n)
                for (int m = 1; m <= 3; ++m) {
                    const double d = x == y ? 0.0 : dn_distance(x, y, n);
                    const BowenBallSpec open{x, n, ScaleIndex(m), BallKind::open};
                    const BowenBallSpec closed{x, n, ScaleIndex(m), BallKind::closed};
                    const bool in_open = d < std::exp(-static_cast<double>(m));
                    const bool in_closed = d <= std::exp(-static_cast<double>(m));
                    if (in_open != (c >= n + m) || in_open != open.contains(y)) FAIL("open ball mismatch");
                    if (in_closed != (c >= n + m - 1) || in_closed != closed.contains(y)) FAIL("closed ball mismatch");
                }
        }
    }
}

TEST_CASE("ultrametric: cylinders are nested or disjoint, d_n obeys the strong triangle inequality") {
    std::vector<Word> short_words{Word{}};
    for (int len = 1; len <= 4; ++len)
        for (std::uint32_t b = 0; b < (1u << len); ++b) short_words.push_back(word_of(b, len));
    for (const auto& u : short_words)
        for (const auto& v : short_words) {
            bool any_u_not_v = false, any_v_not_u = false, any_both = false;
            for (std::uint32_t b = 0; b < 256; ++b) {
                const auto y = word_of(b, 8);
                const bool iu = is_prefix(u, y), iv = is_prefix(v, y);
                any_both |= iu && iv;
                any_u_not_v |= iu && !iv;
                any_v_not_u |= iv && !iu;
            }
            CHECK((!any_both || !any_u_not_v || !any_v_not_u));
        }
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        const auto x = word_of(static_cast<std::uint32_t>(rng() & 255u), 8), y = word_of(static_cast<std::uint32_t>(rng() & 255u), 8),
                   z = word_of(static_cast<std::uint32_t>(rng() & 255u), 8);
        const int n = 1 + static_cast<int>(rng() % 3);
        auto d = [&](const Word& a, const Word& b) {
            if (a == b) return 0.0;
            if (static_cast<int>(prefix_len(a, b)) < n) return 1.0;  // first symbols differ inside the window
            return dn_distance(a, b, n);
        };
        CHECK(d(x, z) <= std::max(d(x, y), d(y, z)) + 1e-15);
    }
}

TEST_CASE("build_tree examples") {
    const auto full = full_shift(2, 3);
    const auto c = full.depth_counts();
    CHECK(c == std::vector<std::uint64_t>{1, 2, 4, 8});
    CHECK(full.nodes().size() == 15);
    CHECK(sft_tree(Alphabet(2), {Word{1, 1}}, 3).depth_counts() == std::vector<std::uint64_t>{1, 2, 3, 5});
    const auto freq = frequency_tree(Alphabet(2), {{0.5, 0.5}, 0.1}, 20);
    double expect = 0.0;
    for (int k = 8; k <= 12; ++k) expect += oracle::binomial(20, k);
    CHECK(static_cast<double>(freq.depth_counts()[20]) == expect);
    CHECK_THROWS_AS(sft_tree(Alphabet(2), {Word{1}, Word{2}}, 3), EmptyCompactSet);
}

TEST_CASE("depth counts") {
    CHECK(full_shift(3, 2).depth_counts() == std::vector<std::uint64_t>{1, 3, 9});
    CHECK(golden_mean_tree(4).depth_counts() == std::vector<std::uint64_t>{1, 2, 3, 5, 8});
    CHECK(single_branch(Alphabet(2), 5).depth_counts() == std::vector<std::uint64_t>(6, 1));
    // Upper-density schedule: free positions counted directly.
    const auto ud = upper_density_tree(200).log_depth_counts();
    for (int d = 0; d <= 200; ++d) CHECK(ud[static_cast<std::size_t>(d)] == doctest::Approx(oracle::free_positions_upto(d) * std::log(2.0)));
}

TEST_CASE("pruning removes dead branches and is idempotent") {
    // "12" has no depth-3 descendant.
    const auto t = explicit_tree(Alphabet(2), {Word{1, 1, 1}, Word{1, 2}, Word{2, 2, 1}}, 3);
    CHECK(!t.contains(Word{1, 2}));
    CHECK(t.depth_counts() == std::vector<std::uint64_t>{1, 2, 2, 2});
    const auto again = explicit_tree(Alphabet(2), t.nodes(), 3);
    CHECK(again.same_nodes(t));
    CHECK(union_tree({&t, &t}).same_nodes(t));
    const auto r = random_pruned_tree(5, 9);
    CHECK(union_tree({&r, &r}).same_nodes(r));
    CHECK(r.compress().same_nodes(r));
    CHECK(r.compress().expand().same_nodes(r));
}

TEST_CASE("quotient trees agree with their explicit expansions") {
    const auto g = golden_mean_tree(10);
    const auto e = g.expand();
    CHECK(e.is_explicit());
    CHECK(e.same_nodes(g));
    CHECK(e.depth_counts() == g.depth_counts());
    const auto refined = g.refine_by_last_symbol();
    CHECK(refined.same_nodes(g));
    for (int d = 1; d <= refined.depth(); ++d)
        for (ClassId c = 0; c < refined.class_count(d); ++c) CHECK(refined.incoming_symbol(d, c).has_value());
    CHECK(g.truncate(4).depth_counts() == std::vector<std::uint64_t>{1, 2, 3, 5, 8});
}

TEST_CASE("union and subtree relations") {
    const auto a = explicit_tree(Alphabet(2), {Word{1, 1}}, 2);
    const auto b = explicit_tree(Alphabet(2), {Word{2, 1}, Word{2, 2}}, 2);
    const auto u = union_tree({&a, &b});
    CHECK(u.depth_counts() == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(a.is_subtree_of(u));
    CHECK(b.is_subtree_of(u));
    CHECK(!u.is_subtree_of(a));
}

TEST_CASE("random pruned trees are reproducible and pruned") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto a = random_pruned_tree(seed, 12), b = random_pruned_tree(seed, 12);
        CHECK(a.same_nodes(b));
        for (const auto& w : a.nodes())
            if (static_cast<int>(w.size()) < 12) {
                bool has_child = false;
                for (Symbol s = 1; s <= 2; ++s) {
                    auto v = w;
                    v.push_back(s);
                    has_child |= a.contains(v);
                }
                CHECK(has_child);
            }
    }
}

TEST_CASE("text and JSON round trips") {
    const auto t = random_pruned_tree(17, 8);
    CHECK(tree_from_text(tree_to_text(t)).same_nodes(t));
    CHECK(tree_from_json(tree_to_json(t)).same_nodes(t));
    CHECK(tree_from_json_text(tree_to_json(t).dump(2)).same_nodes(t));
    CHECK(tree_to_text(tree_from_text(tree_to_text(t))) == tree_to_text(t));
}

TEST_CASE("loader errors carry line numbers") {
    const std::string missing_parent = "# cylinder tree\nalphabet 2\ndepth 2\nnodes 2\n1\n21\n";
    try {
        tree_from_text(missing_parent);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 6);
    }
    const std::string bad_symbol = "alphabet 2\ndepth 1\nnodes 1\n3\n";
    try {
        tree_from_text(bad_symbol);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 4);
    }
    const std::string bad_header = "alphabet two\n";
    CHECK_THROWS_AS(tree_from_text(bad_header), ParseError);
    try {
        tree_from_json_text("{\n \"alphabet\": 2,\n \"depth\": ,\n}");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(tree_from_json(nlohmann::json{{"schema_version", 1}, {"alphabet", 2}, {"depth", 1}, {"nodes", {"", "1", "1"}}}),
                    DomainError);
}
