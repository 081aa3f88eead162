#include "varent/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "varent/error.hpp"
#include "varent/logmath.hpp"

namespace varent {

namespace {

constexpr ClassId kNone = std::numeric_limits<ClassId>::max();

void validate_layers(const Alphabet& alphabet, const std::vector<TreeLayer>& layers) {
    if (layers.empty()) throw DomainError("tree needs at least the root layer");
    if (layers[0].class_count() != 1) throw DomainError("depth 0 must hold exactly the root");
    for (std::size_t d = 0; d < layers.size(); ++d) {
        const auto& L = layers[d];
        if (L.offsets.empty() || L.offsets.front() != 0 || L.offsets.back() != L.edges.size())
            throw DomainError("malformed layer offsets at depth " + std::to_string(d));
        const bool last = d + 1 == layers.size();
        if (last && !L.edges.empty()) throw DomainError("nodes below the truncation depth");
        const std::size_t next_classes = last ? 0 : layers[d + 1].class_count();
        for (std::size_t c = 0; c < L.class_count(); ++c) {
            if (L.offsets[c] > L.offsets[c + 1]) throw DomainError("malformed layer offsets");
            int prev = 0;
            for (auto e = L.offsets[c]; e < L.offsets[c + 1]; ++e) {
                const auto& edge = L.edges[e];
                if (!alphabet.contains(edge.symbol) || edge.symbol <= prev)
                    throw DomainError("child symbols must be in range and strictly increasing");
                if (edge.child >= next_classes) throw DomainError("child class out of range");
                prev = edge.symbol;
            }
        }
    }
}

}  // namespace

CylinderTree::CylinderTree(Alphabet alphabet, std::vector<TreeLayer> layers) : alphabet_(alphabet) {
    validate_layers(alphabet_, layers);
    const std::size_t D = layers.size() - 1;

    std::vector<std::vector<char>> alive(D + 1);
    alive[D].assign(layers[D].class_count(), 1);
    for (std::size_t d = D; d-- > 0;) {
        const auto& L = layers[d];
        alive[d].assign(L.class_count(), 0);
        for (std::size_t c = 0; c < L.class_count(); ++c)
            for (auto e = L.offsets[c]; e < L.offsets[c + 1]; ++e)
                if (alive[d + 1][L.edges[e].child]) {
                    alive[d][c] = 1;
                    break;
                }
    }
    if (!alive[0][0]) throw EmptyCompactSet("no branch reaches depth " + std::to_string(D));

    // Keep classes that are alive and reachable through alive edges, renumbered in order.
    std::vector<std::vector<ClassId>> remap(D + 1);
    remap[0] = {0};
    for (std::size_t d = 0; d < D; ++d) {
        const auto& L = layers[d];
        std::vector<char> reach(layers[d + 1].class_count(), 0);
        for (std::size_t c = 0; c < L.class_count(); ++c) {
            if (remap[d][c] == kNone) continue;
            for (auto e = L.offsets[c]; e < L.offsets[c + 1]; ++e)
                if (alive[d + 1][L.edges[e].child]) reach[L.edges[e].child] = 1;
        }
        remap[d + 1].assign(reach.size(), kNone);
        ClassId next = 0;
        for (std::size_t c = 0; c < reach.size(); ++c)
            if (reach[c]) remap[d + 1][c] = next++;
    }

    layers_.resize(D + 1);
    for (std::size_t d = 0; d <= D; ++d) {
        const auto& L = layers[d];
        auto& out = layers_[d];
        out.offsets.assign(1, 0);
        out.edges.clear();
        for (std::size_t c = 0; c < L.class_count(); ++c) {
            if (remap[d][c] == kNone) continue;
            if (d < D)
                for (auto e = L.offsets[c]; e < L.offsets[c + 1]; ++e) {
                    const auto& edge = L.edges[e];
                    if (alive[d + 1][edge.child]) out.edges.push_back({edge.symbol, remap[d + 1][edge.child]});
                }
            out.offsets.push_back(static_cast<std::uint32_t>(out.edges.size()));
        }
    }

    explicit_ = true;
    homogeneous_ = true;
    first_parent_.assign(D + 1, {});
    incoming_.assign(D + 1, {});
    for (std::size_t d = 0; d <= D; ++d) {
        if (layers_[d].class_count() != 1) homogeneous_ = false;
        if (d < D && layers_[d].edges.size() != layers_[d + 1].class_count()) explicit_ = false;
    }
    incoming_[0].assign(1, -1);
    for (std::size_t d = 0; d < D; ++d) {
        const auto& L = layers_[d];
        first_parent_[d + 1].assign(layers_[d + 1].class_count(), {kNone, 0});
        incoming_[d + 1].assign(layers_[d + 1].class_count(), 0);
        for (ClassId c = 0; c < L.class_count(); ++c)
            for (auto e = L.offsets[c]; e < L.offsets[c + 1]; ++e) {
                const auto& edge = L.edges[e];
                auto& fp = first_parent_[d + 1][edge.child];
                if (fp.first == kNone) fp = {c, edge.symbol};
                auto& in = incoming_[d + 1][edge.child];
                if (in == 0) in = edge.symbol;
                else if (in != edge.symbol) in = -1;
            }
    }
}

std::size_t CylinderTree::total_classes() const {
    std::size_t total = 0;
    for (const auto& L : layers_) total += L.class_count();
    return total;
}

std::vector<std::uint64_t> CylinderTree::depth_counts() const {
    const int D = depth();
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(D) + 1, 0);
    std::vector<std::uint64_t> mult{1};
    for (int d = 0; d <= D; ++d) {
        std::uint64_t total = 0;
        for (auto m : mult)
            if (__builtin_add_overflow(total, m, &total))
                throw DomainError("depth count overflows 64 bits at depth " + std::to_string(d));
        counts[static_cast<std::size_t>(d)] = total;
        if (d == D) break;
        std::vector<std::uint64_t> next(class_count(d + 1), 0);
        for (ClassId c = 0; c < mult.size(); ++c)
            for (const auto& e : children(d, c))
                if (__builtin_add_overflow(next[e.child], mult[c], &next[e.child]))
                    throw DomainError("depth count overflows 64 bits at depth " + std::to_string(d + 1));
        mult = std::move(next);
    }
    return counts;
}

std::vector<std::vector<double>> CylinderTree::log_multiplicities() const {
    const int D = depth();
    std::vector<std::vector<double>> lm(static_cast<std::size_t>(D) + 1);
    lm[0] = {0.0};
    for (int d = 0; d < D; ++d) {
        std::vector<LogAccumulator> acc(class_count(d + 1));
        for (ClassId c = 0; c < class_count(d); ++c)
            for (const auto& e : children(d, c)) acc[e.child].add(lm[static_cast<std::size_t>(d)][c]);
        auto& next = lm[static_cast<std::size_t>(d) + 1];
        next.resize(acc.size());
        for (std::size_t i = 0; i < acc.size(); ++i) next[i] = acc[i].value();
    }
    return lm;
}

std::vector<double> CylinderTree::log_depth_counts() const {
    auto lm = log_multiplicities();
    std::vector<double> out;
    out.reserve(lm.size());
    for (const auto& row : lm) out.push_back(log_sum_exp(row));
    return out;
}

std::optional<ClassId> CylinderTree::locate(const Word& w) const {
    if (static_cast<int>(w.size()) > depth()) return std::nullopt;
    ClassId c = 0;
    for (std::size_t d = 0; d < w.size(); ++d) {
        bool found = false;
        for (const auto& e : children(static_cast<int>(d), c))
            if (e.symbol == w[d]) {
                c = e.child;
                found = true;
                break;
            }
        if (!found) return std::nullopt;
    }
    return c;
}

Word CylinderTree::representative(int d, ClassId c) const {
    Word w(static_cast<std::size_t>(d));
    for (int k = d; k > 0; --k) {
        const auto& [parent, sym] = first_parent_[static_cast<std::size_t>(k)][c];
        w[static_cast<std::size_t>(k) - 1] = sym;
        c = parent;
    }
    return w;
}

std::optional<Symbol> CylinderTree::incoming_symbol(int d, ClassId c) const {
    const auto v = incoming_[static_cast<std::size_t>(d)][c];
    if (v <= 0) return std::nullopt;
    return static_cast<Symbol>(v);
}

std::vector<Word> CylinderTree::nodes(std::size_t limit) const {
    std::vector<Word> out{Word{}};
    std::vector<std::pair<Word, ClassId>> frontier{{Word{}, 0}};
    for (int d = 0; d < depth(); ++d) {
        std::vector<std::pair<Word, ClassId>> next;
        for (const auto& [w, c] : frontier)
            for (const auto& e : children(d, c)) {
                Word child = w;
                child.push_back(e.symbol);
                next.emplace_back(child, e.child);
                out.push_back(std::move(child));
                if (out.size() > limit)
                    throw DomainError("tree has more than " + std::to_string(limit) + " nodes; refusing to enumerate");
            }
        frontier = std::move(next);
    }
    return out;
}

CylinderTree CylinderTree::truncate(int new_depth) const {
    if (new_depth < 0 || new_depth > depth())
        throw DomainError("truncation depth " + std::to_string(new_depth) + " outside [0, " +
                          std::to_string(depth()) + "]");
    std::vector<TreeLayer> layers(layers_.begin(), layers_.begin() + new_depth + 1);
    auto& last = layers.back();
    last.offsets.assign(last.class_count() + 1, 0);
    last.edges.clear();
    return CylinderTree(alphabet_, std::move(layers));
}

CylinderTree CylinderTree::refine_by_last_symbol() const {
    // State packs (class, last symbol); the root has last symbol 0.
    return build_from_automaton<std::uint64_t>(
        alphabet_, depth(), std::uint64_t{0},
        [this](int d, std::uint64_t st, Symbol a) -> std::optional<std::uint64_t> {
            const auto c = static_cast<ClassId>(st >> 8);
            for (const auto& e : children(d, c))
                if (e.symbol == a) return (static_cast<std::uint64_t>(e.child) << 8) | a;
            return std::nullopt;
        });
}

CylinderTree CylinderTree::compress() const {
    const int D = depth();
    std::vector<std::vector<ClassId>> canon(static_cast<std::size_t>(D) + 1);
    std::vector<TreeLayer> layers(static_cast<std::size_t>(D) + 1);
    canon[static_cast<std::size_t>(D)].assign(class_count(D), 0);
    layers[static_cast<std::size_t>(D)].offsets.assign(2, 0);
    for (int d = D - 1; d >= 0; --d) {
        std::map<std::vector<std::pair<Symbol, ClassId>>, ClassId> sig;
        auto& out = layers[static_cast<std::size_t>(d)];
        auto& cd = canon[static_cast<std::size_t>(d)];
        cd.resize(class_count(d));
        for (ClassId c = 0; c < class_count(d); ++c) {
            std::vector<std::pair<Symbol, ClassId>> key;
            for (const auto& e : children(d, c)) key.emplace_back(e.symbol, canon[static_cast<std::size_t>(d) + 1][e.child]);
            auto [it, inserted] = sig.try_emplace(key, static_cast<ClassId>(sig.size()));
            if (inserted)
                for (const auto& [sym, ch] : key) out.edges.push_back({sym, ch});
            if (inserted) out.offsets.push_back(static_cast<std::uint32_t>(out.edges.size()));
            cd[c] = it->second;
        }
    }
    return CylinderTree(alphabet_, std::move(layers));
}

CylinderTree CylinderTree::expand(std::size_t limit) const {
    std::vector<TreeLayer> layers(static_cast<std::size_t>(depth()) + 1);
    std::vector<ClassId> frontier{0};
    std::size_t total = 1;
    for (int d = 0; d < depth(); ++d) {
        std::vector<ClassId> next;
        auto& out = layers[static_cast<std::size_t>(d)];
        for (ClassId c : frontier) {
            for (const auto& e : children(d, c)) {
                out.edges.push_back({e.symbol, static_cast<ClassId>(next.size())});
                next.push_back(e.child);
            }
            out.offsets.push_back(static_cast<std::uint32_t>(out.edges.size()));
        }
        total += next.size();
        if (total > limit) throw DomainError("explicit expansion exceeds " + std::to_string(limit) + " nodes");
        frontier = std::move(next);
    }
    layers.back().offsets.assign(frontier.size() + 1, 0);
    return CylinderTree(alphabet_, std::move(layers));
}

namespace {

// Walks pairs of classes of two trees in lockstep. rel(children_a, children_b)
// decides whether the pair is acceptable.
template <class Rel>
bool walk_pairs(const CylinderTree& a, const CylinderTree& b, Rel rel) {
    if (!(a.alphabet() == b.alphabet()) || a.depth() != b.depth()) return false;
    std::set<std::pair<ClassId, ClassId>> frontier{{0, 0}};
    for (int d = 0; d < a.depth(); ++d) {
        std::set<std::pair<ClassId, ClassId>> next;
        for (const auto& [ca, cb] : frontier) {
            auto ea = a.children(d, ca);
            auto eb = b.children(d, cb);
            if (!rel(ea, eb)) return false;
            std::size_t j = 0;
            for (const auto& e : ea) {
                while (j < eb.size() && eb[j].symbol < e.symbol) ++j;
                if (j < eb.size() && eb[j].symbol == e.symbol) next.emplace(e.child, eb[j].child);
            }
        }
        frontier = std::move(next);
    }
    return true;
}

}  // namespace

bool CylinderTree::same_nodes(const CylinderTree& other) const {
    return walk_pairs(*this, other, [](std::span<const TreeEdge> x, std::span<const TreeEdge> y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i].symbol != y[i].symbol) return false;
        return true;
    });
}

bool CylinderTree::is_subtree_of(const CylinderTree& other) const {
    return walk_pairs(*this, other, [](std::span<const TreeEdge> x, std::span<const TreeEdge> y) {
        std::size_t j = 0;
        for (const auto& e : x) {
            while (j < y.size() && y[j].symbol < e.symbol) ++j;
            if (j == y.size() || y[j].symbol != e.symbol) return false;
        }
        return true;
    });
}

}  // namespace varent
