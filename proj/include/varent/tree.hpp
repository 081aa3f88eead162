#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "varent/word.hpp"

namespace varent {

using ClassId = std::uint32_t;

struct TreeEdge {
    Symbol symbol;
    ClassId child;
};

// Children of class c at this depth are edges[offsets[c] .. offsets[c+1]), sorted by symbol.
struct TreeLayer {
    std::vector<std::uint32_t> offsets{0};
    std::vector<TreeEdge> edges;
    std::size_t class_count() const { return offsets.size() - 1; }
};

// A prefix-closed pruned tree of depth D, stored as a layered quotient DAG: each
// node of depth d belongs to a class and all nodes of a class have identical
// subtrees. An explicit tree is the special case of one node per class; the
// quotient form is what lets full shifts and block schedules reach D in the
// thousands.
class CylinderTree {
public:
    // layers[d] for d = 0..D (layers[D] carries no edges). Validates, then removes
    // dead branches and unreachable classes.
    CylinderTree(Alphabet alphabet, std::vector<TreeLayer> layers);

    const Alphabet& alphabet() const noexcept { return alphabet_; }
    int depth() const noexcept { return static_cast<int>(layers_.size()) - 1; }
    std::size_t class_count(int d) const { return layers_[static_cast<std::size_t>(d)].class_count(); }
    std::size_t total_classes() const;
    std::span<const TreeEdge> children(int d, ClassId c) const {
        const auto& L = layers_[static_cast<std::size_t>(d)];
        return {L.edges.data() + L.offsets[c], L.edges.data() + L.offsets[c + 1]};
    }
    std::uint32_t edge_begin(int d, ClassId c) const { return layers_[static_cast<std::size_t>(d)].offsets[c]; }
    std::size_t edge_count(int d) const { return layers_[static_cast<std::size_t>(d)].edges.size(); }
    const TreeLayer& layer(int d) const { return layers_[static_cast<std::size_t>(d)]; }

    bool is_explicit() const noexcept { return explicit_; }
    bool homogeneous() const noexcept { return homogeneous_; }

    // counts[d] = number of nodes at depth d.
    std::vector<std::uint64_t> depth_counts() const;  // throws DomainError on overflow
    std::vector<double> log_depth_counts() const;
    // log of the number of nodes carried by each class.
    std::vector<std::vector<double>> log_multiplicities() const;

    std::optional<ClassId> locate(const Word& w) const;
    bool contains(const Word& w) const { return locate(w).has_value(); }
    Word representative(int d, ClassId c) const;

    // All nodes, depth-major, lexicographic within a depth. Throws when more than limit.
    std::vector<Word> nodes(std::size_t limit = 5'000'000) const;

    CylinderTree truncate(int new_depth) const;
    // Splits classes so the last symbol of every node is a function of its class.
    CylinderTree refine_by_last_symbol() const;
    // Merges classes with isomorphic subtrees.
    CylinderTree compress() const;
    // One class per node.
    CylinderTree expand(std::size_t limit = 5'000'000) const;

    std::optional<Symbol> incoming_symbol(int d, ClassId c) const;

    bool same_nodes(const CylinderTree& other) const;
    bool is_subtree_of(const CylinderTree& other) const;

private:
    Alphabet alphabet_;
    std::vector<TreeLayer> layers_;
    std::vector<std::vector<std::pair<ClassId, Symbol>>> first_parent_;
    std::vector<std::vector<std::int16_t>> incoming_;  // unique incoming symbol or -1
    bool explicit_ = false;
    bool homogeneous_ = false;
};

// Builds a tree by running a deterministic automaton for D steps. step(depth,
// state, symbol) returns the successor or nullopt when the symbol is forbidden.
// States are deduplicated per depth, so the class count equals the number of
// distinct reachable states.
template <class State, class Hash = std::hash<State>, class Step>
CylinderTree build_from_automaton(const Alphabet& alphabet, int D, State init, Step&& step) {
    std::vector<TreeLayer> layers(static_cast<std::size_t>(D) + 1);
    std::vector<State> current;
    current.push_back(std::move(init));
    for (int d = 0; d < D; ++d) {
        std::vector<State> next;
        std::unordered_map<State, ClassId, Hash> index;
        auto& layer = layers[static_cast<std::size_t>(d)];
        for (const State& st : current) {
            for (int a = 1; a <= alphabet.size(); ++a) {
                std::optional<State> ns = step(d, st, static_cast<Symbol>(a));
                if (!ns) continue;
                auto [it, inserted] = index.try_emplace(*ns, static_cast<ClassId>(next.size()));
                if (inserted) next.push_back(std::move(*ns));
                layer.edges.push_back({static_cast<Symbol>(a), it->second});
            }
            layer.offsets.push_back(static_cast<std::uint32_t>(layer.edges.size()));
        }
        current = std::move(next);
    }
    layers[static_cast<std::size_t>(D)].offsets.assign(current.size() + 1, 0);
    return CylinderTree(alphabet, std::move(layers));
}

}  // namespace varent
