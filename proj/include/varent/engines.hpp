#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "varent/tree.hpp"
#include "varent/word.hpp"

namespace varent {

// How node weights e^{-s n(u)} and admissible depths are derived from (N, m).
//   ball    n(u) is the time length of the Bowen ball whose cylinder is u
//   clopen  generator-partition joins: n(u) = |u|, admissible from depth N
//   depth   ball admissibility but n(u) = |u| (cylinder-length normalization)
enum class WeightMode { ball, clopen, depth };

const char* to_string(WeightMode mode);
WeightMode weight_mode_from_string(const std::string& name);

// Admissible nodes have |u| >= min_depth; their exponent is n(u) = |u| - offset.
struct NodeWeighting {
    int min_depth = 1;
    int offset = 0;
    int exponent(int d) const { return d - offset; }
};

// Open-ball covers: cylinder length n+m for n >= N.
NodeWeighting cover_weighting(int D, int N, ScaleIndex m, WeightMode mode);
// Closed-ball packings: cylinder length n+m-1 for n >= N.
NodeWeighting packing_weighting(int D, int N, ScaleIndex m, WeightMode mode);

struct CutsetResult {
    double log_value = 0.0;
    double s = 0.0;
    NodeWeighting weighting;
    std::vector<std::vector<double>> log_subtree;   // f per class
    std::vector<std::vector<std::uint8_t>> cut;     // class is cut when reached
    double value() const;
    // Chosen cutset: cut classes with no cut ancestor.
    std::vector<Word> nodes(const CylinderTree& tree, std::size_t limit = 1'000'000) const;
};

struct AntichainResult {
    double log_value = 0.0;
    double s = 0.0;
    NodeWeighting weighting;
    std::vector<std::vector<double>> log_subtree;   // g per class
    std::vector<std::vector<std::uint8_t>> take;    // class is selected when reached
    double value() const;
    std::vector<Word> nodes(const CylinderTree& tree, std::size_t limit = 1'000'000) const;
};

// Max flow with node capacities e^{-s n(u)} on admissible nodes. The flow of a
// node is the root flow times the product of edge shares along its path.
struct FlowResult {
    double log_value = 0.0;
    double s = 0.0;
    NodeWeighting weighting;
    std::vector<std::vector<double>> log_subtree;  // F per class: max flow of the subtree alone
    std::vector<std::vector<double>> log_share;    // per depth, per edge
    double value() const;
    double log_node_flow(const CylinderTree& tree, const Word& u) const;
};

CutsetResult min_cutset_value(const CylinderTree& tree, double s, int N, ScaleIndex m, WeightMode mode = WeightMode::ball);
CutsetResult min_cutset_weighted(const CylinderTree& tree, double s, const NodeWeighting& w);

AntichainResult max_antichain_value(const CylinderTree& tree, double s, int N, ScaleIndex m,
                                    WeightMode mode = WeightMode::ball);
AntichainResult max_antichain_weighted(const CylinderTree& tree, double s, const NodeWeighting& w);

FlowResult weighted_cover_value(const CylinderTree& tree, double s, int N, ScaleIndex m, WeightMode mode = WeightMode::ball);
FlowResult weighted_cover_weighted(const CylinderTree& tree, double s, const NodeWeighting& w);

// Independent checks that the flow and the cutset certify each other.
struct DualityCertificate {
    bool flow_feasible = false;     // node flow <= capacity on every admissible node
    bool conserving = false;        // edge shares of each class sum to 1
    bool cut_covers = false;        // every depth-D branch meets the cutset
    double log_flow_value = 0.0;
    double log_cut_weight = 0.0;    // summed over the chosen cut nodes, not read off the DP
    double relative_gap = 0.0;
    bool ok(double tol = 1e-9) const { return flow_feasible && conserving && cut_covers && relative_gap <= tol; }
};
DualityCertificate certify_duality(const CylinderTree& tree, const FlowResult& flow, const CutsetResult& cut);

// Packing quantity regularized over decompositions of the boundary into subtrees
// at depth <= D0. Each part Z_u is charged min over N' in [N, N_cap] of P_{N'}(Z_u),
// where a ball centred in Z_u may have a cylinder above u. Coarser parts are
// found by an exact DP over subtree-aligned decompositions.
struct PackingRegularized {
    double log_value = 0.0;
    double log_prepacking = 0.0;  // P_N of the whole tree
    int D0 = 0;
    int N = 1;
    int N_cap = 1;
    double log_parts = 0.0;       // log of the number of parts chosen
    bool merge_truncated = false; // the merge search is exhaustive; kept for the report schema
};
PackingRegularized packing_regularized(const CylinderTree& tree, double s, ScaleIndex m, int N, int D0,
                                       WeightMode mode = WeightMode::ball, std::optional<int> N_cap = std::nullopt);

struct VitaliSelection {
    std::vector<std::size_t> selected;  // indices into the input, in selection order
    bool disjoint = false;
    bool covers_factor1 = false;  // selected balls at their own radius cover every input ball
    bool covers_factor5 = false;  // radius 5 e^{-m}, i.e. cylinder length n+m-2 on the grid
};
// Greedy by decreasing radius (increasing m); ties keep input order.
VitaliSelection vitali_select(std::span<const BowenBallSpec> balls);

}  // namespace varent
