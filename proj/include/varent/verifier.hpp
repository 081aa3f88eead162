#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "varent/entropy.hpp"
#include "varent/generators.hpp"
#include "varent/measure.hpp"
#include "varent/tree.hpp"

namespace varent {

// One candidate measure and its integrated finite-scale local entropy.
struct TestedMeasure {
    std::string name;
    std::string provenance;   // how it was built
    double s = 0.0;           // construction exponent, 0 for parametric families
    double value = 0.0;       // integral of the lower (Bowen) or upper (packing) estimate
    std::string method;       // exact / monte_carlo / stage_subsequence
    bool feasible = true;
    std::string note;
};

struct VPReport {
    std::string kind;              // "bowen" or "packing"
    EntropyEstimate entropy;
    double measure_side = 0.0;
    double gap = 0.0;              // entropy.value - measure_side
    std::vector<TestedMeasure> measures;
    int m = 1;
    int D = 0;
    double tol = 0.0;
    double gap_threshold = 0.05;
    bool easy_direction_ok = false;   // measure_side <= s_high + tol
    bool gap_ok = false;
    bool degenerate = false;          // no constructive witness was available
    bool flagged = false;             // a fallback was used
    std::string note;
    bool passed() const { return easy_direction_ok && gap_ok; }
};

struct BowenVPOptions {
    std::vector<double> s_fractions{1.0, 0.99, 0.98, 0.95, 0.9};  // grid s = fraction * s_low
    double gap_threshold = 0.05;
    IntegralOptions integral{LocalNormalization::depth};
};

VPReport verify_bowen_vp(std::shared_ptr<const CylinderTree> tree, ScaleIndex m, double tol, const BowenVPOptions& options = {});

struct PackingVPOptions {
    double margin = 0.03;
    double gap_threshold = 0.05;
    IntegralOptions integral{LocalNormalization::depth};
};

VPReport verify_packing_vp(std::shared_ptr<const CylinderTree> tree, ScaleIndex m, double tol, int stages,
                           const PackingVPOptions& options = {});

// Words whose depth-D symbol frequencies lie within delta of p.
CylinderTree besicovitch_tree(const std::vector<double>& p, double delta, int D);

struct NontypicalTree {
    CylinderTree tree;
    BlockSchedule schedule;
    std::vector<int> checkpoints;     // block ends, increasing; the last equals D
    double f_low = 0.0;               // frequency of symbol 1 in the sparse blocks
    double f_high = 0.0;
    int other_symbols = 1;            // symbols 2..other_symbols+1 fill the remaining positions
    double schedule_entropy = 0.0;    // (1/D) log of the depth-D count
    double predicted_oscillation = 0.0;
};

// Blocks end at D/4^k; they alternate between a sparse and a dense frequency of
// symbol 1 with exact counts tuned so every block grows at rate about s.
NontypicalTree nontypical_tree(int l, double s, int D);

struct OscillationSweep {
    int checkpoint_a = 0;
    int checkpoint_b = 0;
    double min_oscillation = 0.0;     // over all depth-D branches
    double fraction_at_least = 0.0;   // share of branches reaching the threshold
    double threshold = 0.2;
    long double branches = 0;
};

// |A(a) - A(b)| for the Birkhoff average A(n) of the indicator of symbol 1.
OscillationSweep checkpoint_oscillation(const CylinderTree& tree, int a, int b, double threshold = 0.2);

struct InvariantRow {
    int tree = 0;
    std::uint64_t seed = 0;
    std::string invariant;
    bool pass = false;
    double margin = 0.0;   // how far inside (>= 0) or outside (< 0) the tolerance
    std::string detail;
};

struct SuiteOptions {
    std::uint64_t seed = 42;
    int count = 200;
    int depth = 12;
    double tol = 1e-4;
    int jobs = 1;
    // Required max over trees of h^P - h^B for non-vacuity.
    double separation = 0.1;
};

struct SuiteReport {
    SuiteOptions options;
    std::vector<InvariantRow> rows;
    std::vector<nlohmann::json> counterexamples;   // tree + failing invariant
    double max_packing_minus_bowen = 0.0;
    int max_separation_tree = -1;
    double adversarial_bowen = 0.0;
    double adversarial_packing = 0.0;
    bool non_vacuous = false;
    bool all_passed() const;
    std::vector<std::pair<std::string, std::pair<int, int>>> summary() const;  // invariant -> (passed, total)
};

SuiteReport run_property_suite(const SuiteOptions& options);

// Seed of tree i in a suite run.
std::uint64_t suite_tree_seed(std::uint64_t seed, int index);

}  // namespace varent
