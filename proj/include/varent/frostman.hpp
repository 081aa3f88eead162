#pragma once

#include <memory>
#include <string>
#include <vector>

#include "varent/engines.hpp"
#include "varent/measure.hpp"
#include "varent/tree.hpp"

namespace varent {

// Normalized max flow: mu(u) = node_flow(u) / c.
struct FrostmanResult {
    double s = 0.0;
    double log_c = 0.0;
    NodeWeighting weighting;
    FlowResult flow;
    CylinderMeasure measure;
    // max over admissible nodes of log(c * mu(u) * e^{s n(u)}); <= 0 up to rounding.
    double log_max_ratio = 0.0;
};

FrostmanResult frostman_measure(std::shared_ptr<const CylinderTree> tree, double s, int N, ScaleIndex m,
                                WeightMode mode = WeightMode::ball);

// Nodes of one class chosen together; every member has weight e^{log_weight}.
struct AntichainGroup {
    int depth = 0;
    ClassId cls = 0;
    long double count = 0;  // members (nodes) below the subtree root
    double log_weight = 0.0;
    Word representative;
};

struct WindowAntichain {
    std::vector<AntichainGroup> groups;
    int N1 = 1;          // granularity index: every weight is < b - a
    int depth_cap = 0;   // deepest depth considered
    double log_sum = 0.0;
    long double discarded = 0;
};

// Finite antichain strictly below u, admissible for some N1 >= N with e^{-s N1} < b - a,
// with weight sum in (a, b): an over-full antichain is trimmed one node at a time,
// lightest first. The shallowest depth cap that allows an over-full antichain is used.
WindowAntichain antichain_in_window(const CylinderTree& tree, const Word& u, double s, int N, double a, double b,
                                    ScaleIndex m = ScaleIndex(1), WeightMode mode = WeightMode::ball);

// Log-domain form used by the staged construction; nodes must also lie at depth >= min_node_depth.
WindowAntichain antichain_in_window_log(const CylinderTree& tree, int root_depth, ClassId root_class, const Word& root_word,
                                        double s, int N, double log_a, double log_b, ScaleIndex m, WeightMode mode,
                                        int min_node_depth);

struct PackingGroup {
    int stage = 1;
    int depth = 0;
    ClassId cls = 0;
    int parent = -1;                 // index of the enclosing group of the previous stage
    long double count_per_parent = 1;
    double log_weight = 0.0;         // -s n(u)
    double log_final_mass = 0.0;     // unnormalized mass of each member after the last stage
    Word representative;
};

struct PackingFrostmanResult {
    double s = 0.0;
    int m = 1;
    WeightMode mode = WeightMode::ball;
    int stages = 0;
    std::vector<PackingGroup> groups;   // stage-major
    std::vector<int> stage_min_depth;
    std::vector<int> stage_max_depth;
    double log_total_mass = 0.0;
    double constant_C = 0.0;            // prod_{n>=1} (1 + 2^{-n})
    double worst_log_ratio = 0.0;       // max over groups of log(mass / (C e^{-s n}))
    bool bound_holds = false;

    // Stage measure extended additively, with a Dirac continuation below the last
    // stage. Explicit trees only.
    CylinderMeasure to_measure(std::shared_ptr<const CylinderTree> tree) const;
};

struct PackingFrostmanOptions {
    int N = 1;
    WeightMode mode = WeightMode::ball;
};

double packing_constant();

PackingFrostmanResult packing_frostman(const CylinderTree& tree, double s, ScaleIndex m, int stages,
                                       const PackingFrostmanOptions& options = {});

}  // namespace varent
