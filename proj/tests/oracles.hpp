#pragma once
// Test-side oracles, written without the library's DP code.

#include <cmath>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "varent/engines.hpp"
#include "varent/exact.hpp"
#include "varent/tree.hpp"
#include "varent/word.hpp"

namespace oracle {

using varent::Word;
using Rational = varent::exact::Rational;

inline double log_binomial(int n, int k) { return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0); }

inline double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Every antichain of the tree, reduced to (nodes per depth, covers every leaf).
// Only admissible nodes (depth >= min_depth) may be chosen.
using Profile = std::pair<std::vector<int>, bool>;

inline std::set<Profile> antichain_profiles(const std::map<Word, std::vector<Word>>& kids, const Word& u, int D, int min_depth) {
    std::set<Profile> combos;
    const int d = static_cast<int>(u.size());
    if (d == D) {
        combos.insert({std::vector<int>(static_cast<std::size_t>(D) + 1, 0), false});
    } else {
        combos.insert({std::vector<int>(static_cast<std::size_t>(D) + 1, 0), true});
        for (const auto& v : kids.at(u)) {
            const auto sub = antichain_profiles(kids, v, D, min_depth);
            std::set<Profile> next;
            for (const auto& a : combos)
                for (const auto& b : sub) {
                    Profile p{a.first, a.second && b.second};
                    for (std::size_t i = 0; i < p.first.size(); ++i) p.first[i] += b.first[i];
                    next.insert(std::move(p));
                }
            combos = std::move(next);
        }
    }
    if (d >= min_depth) {
        std::vector<int> one(static_cast<std::size_t>(D) + 1, 0);
        one[static_cast<std::size_t>(d)] = 1;
        combos.insert({one, true});
    }
    return combos;
}

inline std::map<Word, std::vector<Word>> child_map(const varent::CylinderTree& t) {
    std::map<Word, std::vector<Word>> kids;
    for (const auto& w : t.nodes()) {
        kids[w];
        if (!w.empty()) kids[Word(w.begin(), w.end() - 1)].push_back(w);
    }
    return kids;
}

struct Extrema {
    Rational min_cut;
    Rational max_antichain;
};

// Exhaustive extrema with weights x^{d - offset}.
inline Extrema brute_force(const varent::CylinderTree& t, const Rational& x, const varent::NodeWeighting& cover,
                           const varent::NodeWeighting& pack) {
    const auto kids = child_map(t);
    const int D = t.depth();
    auto weight = [&](const std::vector<int>& prof, const varent::NodeWeighting& w) {
        Rational sum = 0;
        for (int d = 0; d <= D; ++d)
            if (prof[static_cast<std::size_t>(d)]) {
                Rational p = 1;
                for (int k = 0; k < w.exponent(d); ++k) p *= x;
                sum += p * prof[static_cast<std::size_t>(d)];
            }
        return sum;
    };
    Extrema e;
    bool first = true;
    for (const auto& [prof, covers] : antichain_profiles(kids, Word{}, D, cover.min_depth)) {
        if (!covers) continue;
        const auto v = weight(prof, cover);
        if (first || v < e.min_cut) e.min_cut = v;
        first = false;
    }
    e.max_antichain = 0;
    for (const auto& [prof, covers] : antichain_profiles(kids, Word{}, D, pack.min_depth)) {
        const auto v = weight(prof, pack);
        if (v > e.max_antichain) e.max_antichain = v;
    }
    return e;
}

// Spectral radius of a 0/1 matrix by power iteration.
inline double spectral_radius(const std::vector<std::vector<double>>& A) {
    std::vector<double> v(A.size(), 1.0);
    double lambda = 0.0;
    for (int it = 0; it < 2000; ++it) {
        std::vector<double> w(A.size(), 0.0);
        for (std::size_t i = 0; i < A.size(); ++i)
            for (std::size_t j = 0; j < A.size(); ++j) w[i] += A[i][j] * v[j];
        double norm = 0.0;
        for (double z : w) norm = std::max(norm, std::abs(z));
        for (auto& z : w) z /= norm;
        lambda = norm;
        v = std::move(w);
    }
    return lambda;
}

// Free positions of the upper-density schedule, counted directly: p in [4^k, 2*4^k).
inline int free_positions_upto(int d) {
    int count = 0;
    for (int p = 1; p <= d; ++p) {
        long q = 1;
        while (q * 4 <= p) q *= 4;
        if (p < 2 * q) ++count;
    }
    return count;
}

inline double entropy_nats(const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0) h -= x * std::log(x);
    return h;
}

}  // namespace oracle
