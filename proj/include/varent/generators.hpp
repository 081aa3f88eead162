#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "varent/tree.hpp"

namespace varent {

struct FrequencyConstraint {
    std::vector<double> targets;  // p_i, summing to 1
    double tolerance = 0.0;       // delta
};

// A block of consecutive symbol positions.
//   free         any symbol in `allowed`
//   forced       always `forced`
//   exact_count  exactly `ones` occurrences of symbol 1; the other positions use `allowed`
struct Block {
    enum class Kind { free, forced, exact_count };
    Kind kind = Kind::free;
    int length = 1;
    std::vector<Symbol> allowed;
    Symbol forced = 1;
    int ones = 0;
};

struct BlockSchedule {
    std::vector<Block> blocks;
    int total_length() const;
};

CylinderTree full_shift(int l, int D);
CylinderTree sft_tree(const Alphabet& alphabet, const std::vector<Word>& forbidden, int D);
CylinderTree golden_mean_tree(int D);
CylinderTree frequency_tree(const Alphabet& alphabet, const FrequencyConstraint& constraint, int D);
CylinderTree explicit_tree(const Alphabet& alphabet, const std::vector<Word>& nodes, int D);
CylinderTree union_tree(std::span<const CylinderTree* const> parts);
CylinderTree union_tree(std::initializer_list<const CylinderTree*> parts);
// A block extending past D only constrains the prefix: a partial block is kept
// when it can still be completed.
CylinderTree block_schedule_tree(const Alphabet& alphabet, const BlockSchedule& schedule, int D);
CylinderTree single_branch(const Alphabet& alphabet, int D, Symbol s = 1);

// Symbols {1,2} are free at positions p in [4^k, 2*4^k) (1-based) and forced to 1 elsewhere,
// so the upper density of free positions is 2/3 and the lower density 1/3.
BlockSchedule upper_density_schedule(int D);
CylinderTree upper_density_tree(int D);

// Full binary tree on the first `bushy` levels, then a single branch down to D.
CylinderTree bushy_then_thin_tree(int bushy, int D);

struct RandomTreeOptions {
    int alphabet = 2;
    double keep_min = 0.3;
    double keep_max = 1.0;
    double switch_probability = 0.5;  // chance of a second branching regime below a random depth
};

// Galton-Watson style pruned tree; a node never dies before depth D (one child is
// forced when the draw keeps none). Reproducible from the seed alone.
CylinderTree random_pruned_tree(std::uint64_t seed, int D, const RandomTreeOptions& options = {});

// Uniform double in [0,1) from 53 random bits; independent of the standard library's distributions.
double unit_draw(std::uint64_t bits);

}  // namespace varent
