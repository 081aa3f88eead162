#include "varent/generators.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <unordered_set>

#include "varent/error.hpp"

namespace varent {

namespace {

struct VectorHash {
    template <class T>
    std::size_t operator()(const std::vector<T>& v) const noexcept {
        std::size_t h = 0xcbf29ce484222325ULL;
        for (const auto& x : v) {
            h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }
};

void require_depth(int D) {
    if (D < 1) throw DomainError("tree depth D must be >= 1");
}

}  // namespace

int BlockSchedule::total_length() const {
    int total = 0;
    for (const auto& b : blocks) total += b.length;
    return total;
}

double unit_draw(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

CylinderTree full_shift(int l, int D) {
    require_depth(D);
    Alphabet alphabet(l);
    return build_from_automaton<int>(alphabet, D, 0, [](int, int, Symbol) -> std::optional<int> { return 0; });
}

CylinderTree sft_tree(const Alphabet& alphabet, const std::vector<Word>& forbidden, int D) {
    require_depth(D);
    std::size_t K = 1;
    std::unordered_set<std::string> banned;
    for (const auto& w : forbidden) {
        if (w.empty()) throw DomainError("forbidden words must be nonempty");
        if (static_cast<int>(w.size()) >= D) throw DomainError("forbidden words must be shorter than D");
        for (Symbol s : w)
            if (!alphabet.contains(s)) throw DomainError("forbidden word uses a symbol outside the alphabet");
        K = std::max(K, w.size());
        banned.insert(format_word(w));
    }
    // State: the last K-1 symbols as text.
    return build_from_automaton<std::string>(
        alphabet, D, std::string{}, [&](int, const std::string& st, Symbol a) -> std::optional<std::string> {
            std::string ext = st + symbol_char(a);
            for (std::size_t len = 1; len <= ext.size(); ++len)
                if (banned.count(ext.substr(ext.size() - len))) return std::nullopt;
            if (ext.size() > K - 1) ext.erase(0, ext.size() - (K - 1));
            return ext;
        });
}

CylinderTree golden_mean_tree(int D) { return sft_tree(Alphabet(2), {Word{1, 1}}, D); }

CylinderTree frequency_tree(const Alphabet& alphabet, const FrequencyConstraint& fc, int D) {
    require_depth(D);
    const int l = alphabet.size();
    if (static_cast<int>(fc.targets.size()) != l) throw DomainError("frequency targets must match the alphabet size");
    double sum = 0.0;
    for (double p : fc.targets) {
        if (!(p >= 0.0)) throw DomainError("frequency targets must be nonnegative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DomainError("frequency targets must sum to 1");
    if (!(fc.tolerance >= 0.0)) throw DomainError("frequency tolerance must be >= 0");

    // Integer bounds on the final count of each symbol; 1e-9 absorbs representation error
    // at exact boundaries such as 0.4 * 20.
    std::vector<int> lo(static_cast<std::size_t>(l)), hi(static_cast<std::size_t>(l));
    for (int i = 0; i < l; ++i) {
        const double p = fc.targets[static_cast<std::size_t>(i)];
        lo[static_cast<std::size_t>(i)] = std::max(0, static_cast<int>(std::ceil((p - fc.tolerance) * D - 1e-9)));
        hi[static_cast<std::size_t>(i)] = std::min(D, static_cast<int>(std::floor((p + fc.tolerance) * D + 1e-9)));
    }
    auto feasible = [&](const std::vector<int>& counts, int remaining) {
        long lower = 0, upper = 0;
        for (int i = 0; i < l; ++i) {
            const auto k = static_cast<std::size_t>(i);
            const int a = std::max(counts[k], lo[k]);
            const int b = std::min(hi[k], counts[k] + remaining);
            if (a > b) return false;
            lower += a;
            upper += b;
        }
        return lower <= D && upper >= D;
    };
    std::vector<int> init(static_cast<std::size_t>(l), 0);
    if (!feasible(init, D)) throw EmptyCompactSet("no word of length " + std::to_string(D) + " meets the frequency window");
    return build_from_automaton<std::vector<int>, VectorHash>(
        alphabet, D, init, [&](int d, const std::vector<int>& st, Symbol a) -> std::optional<std::vector<int>> {
            std::vector<int> next = st;
            ++next[static_cast<std::size_t>(a) - 1];
            if (!feasible(next, D - d - 1)) return std::nullopt;
            return next;
        });
}

CylinderTree explicit_tree(const Alphabet& alphabet, const std::vector<Word>& nodes, int D) {
    require_depth(D);
    std::unordered_set<std::string> closure{std::string{}};
    for (const auto& w : nodes) {
        if (static_cast<int>(w.size()) > D) throw DomainError("explicit node deeper than D: " + format_word(w));
        for (Symbol s : w)
            if (!alphabet.contains(s)) throw DomainError("explicit node uses a symbol outside the alphabet");
        std::string text = format_word(w);
        for (std::size_t len = 0; len <= text.size(); ++len) closure.insert(text.substr(0, len));
    }
    return build_from_automaton<std::string>(
        alphabet, D, std::string{}, [&](int, const std::string& st, Symbol a) -> std::optional<std::string> {
            std::string next = st + symbol_char(a);
            if (!closure.count(next)) return std::nullopt;
            return next;
        });
}

CylinderTree union_tree(std::span<const CylinderTree* const> parts) {
    if (parts.empty()) throw DomainError("union of no trees");
    const auto& alphabet = parts.front()->alphabet();
    const int D = parts.front()->depth();
    for (const auto* t : parts)
        if (!(t->alphabet() == alphabet) || t->depth() != D)
            throw DomainError("union requires equal alphabets and depths");
    constexpr ClassId kAbsent = std::numeric_limits<ClassId>::max();
    using State = std::vector<ClassId>;
    return build_from_automaton<State, VectorHash>(
        alphabet, D, State(parts.size(), 0), [&](int d, const State& st, Symbol a) -> std::optional<State> {
            State next(parts.size(), kAbsent);
            bool any = false;
            for (std::size_t i = 0; i < parts.size(); ++i) {
                if (st[i] == kAbsent) continue;
                for (const auto& e : parts[i]->children(d, st[i]))
                    if (e.symbol == a) {
                        next[i] = e.child;
                        any = true;
                        break;
                    }
            }
            if (!any) return std::nullopt;
            return next;
        });
}

CylinderTree union_tree(std::initializer_list<const CylinderTree*> parts) {
    std::vector<const CylinderTree*> v(parts);
    return union_tree(std::span<const CylinderTree* const>(v));
}

CylinderTree block_schedule_tree(const Alphabet& alphabet, const BlockSchedule& schedule, int D) {
    require_depth(D);
    if (schedule.total_length() < D)
        throw DomainError("block schedule covers " + std::to_string(schedule.total_length()) +
                          " positions but D = " + std::to_string(D));
    // Block index and offset of every position below D.
    std::vector<std::pair<int, int>> where;
    where.reserve(static_cast<std::size_t>(D));
    for (int b = 0; b < static_cast<int>(schedule.blocks.size()) && static_cast<int>(where.size()) < D; ++b) {
        const auto& blk = schedule.blocks[static_cast<std::size_t>(b)];
        if (blk.length < 1) throw DomainError("block lengths must be >= 1");
        for (const Symbol s : blk.allowed)
            if (!alphabet.contains(s)) throw DomainError("block allows a symbol outside the alphabet");
        if (blk.kind == Block::Kind::forced && !alphabet.contains(blk.forced))
            throw DomainError("forced symbol outside the alphabet");
        if (blk.kind == Block::Kind::exact_count && (blk.ones < 0 || blk.ones > blk.length))
            throw DomainError("exact-count block needs 0 <= ones <= length");
        for (int j = 0; j < blk.length && static_cast<int>(where.size()) < D; ++j) where.emplace_back(b, j);
    }
    // State: number of 1s placed so far in the current block.
    return build_from_automaton<int>(alphabet, D, 0, [&](int d, int ones, Symbol a) -> std::optional<int> {
        const auto [b, j] = where[static_cast<std::size_t>(d)];
        const auto& blk = schedule.blocks[static_cast<std::size_t>(b)];
        const bool ends = j + 1 == blk.length;
        const bool allowed = std::find(blk.allowed.begin(), blk.allowed.end(), a) != blk.allowed.end();
        switch (blk.kind) {
        case Block::Kind::free:
            if (!allowed) return std::nullopt;
            return 0;
        case Block::Kind::forced:
            if (a != blk.forced) return std::nullopt;
            return 0;
        case Block::Kind::exact_count: {
            const int left_after = blk.length - j - 1;
            int next = ones;
            if (a == 1) {
                if (ones + 1 > blk.ones) return std::nullopt;
                next = ones + 1;
            } else {
                if (!allowed || blk.ones - ones > left_after) return std::nullopt;
            }
            return ends ? 0 : next;
        }
        }
        return std::nullopt;
    });
}

CylinderTree single_branch(const Alphabet& alphabet, int D, Symbol s) {
    BlockSchedule sched;
    sched.blocks.push_back({Block::Kind::forced, D, {}, s, 0});
    return block_schedule_tree(alphabet, sched, D);
}

BlockSchedule upper_density_schedule(int D) {
    BlockSchedule sched;
    int pos = 1;  // next 1-based position
    for (long long k = 1; pos <= D; k *= 4) {
        const long long free_end = 2 * k;  // free on [k, 2k)
        if (pos < k) {
            sched.blocks.push_back({Block::Kind::forced, static_cast<int>(k - pos), {}, 1, 0});
            pos = static_cast<int>(k);
        }
        sched.blocks.push_back({Block::Kind::free, static_cast<int>(free_end - k), {1, 2}, 1, 0});
        pos = static_cast<int>(free_end);
    }
    return sched;
}

CylinderTree upper_density_tree(int D) { return block_schedule_tree(Alphabet(2), upper_density_schedule(D), D); }

CylinderTree bushy_then_thin_tree(int bushy, int D) {
    if (bushy < 0 || bushy > D) throw DomainError("bushy depth must lie in [0, D]");
    BlockSchedule sched;
    if (bushy > 0) sched.blocks.push_back({Block::Kind::free, bushy, {1, 2}, 1, 0});
    if (D > bushy) sched.blocks.push_back({Block::Kind::forced, D - bushy, {}, 1, 0});
    return block_schedule_tree(Alphabet(2), sched, D);
}

CylinderTree random_pruned_tree(std::uint64_t seed, int D, const RandomTreeOptions& opt) {
    require_depth(D);
    Alphabet alphabet(opt.alphabet);
    if (!(opt.keep_min > 0.0 && opt.keep_min <= opt.keep_max && opt.keep_max <= 1.0))
        throw DomainError("random tree keep probabilities must satisfy 0 < min <= max <= 1");
    std::mt19937_64 rng(seed);
    auto draw = [&] { return unit_draw(rng()); };
    const double q0 = opt.keep_min + (opt.keep_max - opt.keep_min) * draw();
    double q1 = q0;
    int switch_depth = D;
    if (draw() < opt.switch_probability && D > 3) {
        q1 = opt.keep_min + (opt.keep_max - opt.keep_min) * draw();
        switch_depth = 1 + static_cast<int>(draw() * (D - 2));
    }
    std::vector<TreeLayer> layers(static_cast<std::size_t>(D) + 1);
    std::size_t width = 1;
    for (int d = 0; d < D; ++d) {
        const double q = d < switch_depth ? q0 : q1;
        auto& L = layers[static_cast<std::size_t>(d)];
        ClassId next = 0;
        for (std::size_t c = 0; c < width; ++c) {
            std::vector<Symbol> kept;
            for (int a = 1; a <= alphabet.size(); ++a)
                if (draw() < q) kept.push_back(static_cast<Symbol>(a));
            if (kept.empty()) kept.push_back(static_cast<Symbol>(1 + rng() % static_cast<std::uint64_t>(alphabet.size())));
            for (Symbol a : kept) L.edges.push_back({a, next++});
            L.offsets.push_back(static_cast<std::uint32_t>(L.edges.size()));
        }
        width = next;
    }
    layers.back().offsets.assign(width + 1, 0);
    return CylinderTree(alphabet, std::move(layers));
}

}  // namespace varent
