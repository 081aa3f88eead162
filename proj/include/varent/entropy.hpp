#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "varent/engines.hpp"
#include "varent/tree.hpp"

namespace varent {

enum class EntropyKind { bowen, packing, capacity, weighted };
const char* to_string(EntropyKind kind);

struct Diagnostic {
    std::string label;
    int depth = 0;
    int N = 0;
    int m = 0;
    double s = 0.0;
    double value = 0.0;
};

struct EntropyOptions {
    std::optional<int> N;                  // default floor(D/2)
    // Cylinder-length normalization by default: the ball-mode exponent |u|-m
    // biases finite-D critical exponents by a factor D/(D-m).
    WeightMode mode = WeightMode::depth;
    bool diagnostics = true;
    double convergence_spread = 0.05;      // allowed spread of estimates across truncation depths
    int max_iterations = 200;
};

struct EntropyEstimate {
    EntropyKind kind = EntropyKind::bowen;
    double value = 0.0;   // nats
    double s_low = 0.0;
    double s_high = 0.0;
    int depth_used = 0;
    int N_used = 0;
    int m = 1;
    WeightMode mode = WeightMode::depth;
    int iterations = 0;
    bool converged = true;
    std::string note;
    std::vector<Diagnostic> diagnostics;
};

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
    int iterations = 0;
};

// Bisection for the critical exponent of a monotone family: above(s) holds for
// s below the critical value. Returns [0,0] when above(lo) already fails.
Bracket bisect_critical(const std::function<bool(double)>& above, double lo, double hi, double tol, int max_iterations);

EntropyEstimate bowen_entropy(const CylinderTree& tree, ScaleIndex m, double tol, const EntropyOptions& options = {});
EntropyEstimate packing_entropy(const CylinderTree& tree, ScaleIndex m, double tol, const EntropyOptions& options = {});
// Largest slope (1/n) log c_{n+m-1} over the tail window n in [N, D-m+1]; with
// depth normalization the slope is taken per cylinder length instead.
EntropyEstimate capacity_entropy(const CylinderTree& tree, ScaleIndex m, double tol, const EntropyOptions& options = {});
EntropyEstimate weighted_entropy(const CylinderTree& tree, ScaleIndex m, double tol, const EntropyOptions& options = {});

// Homogeneous-tree closed forms (one class per depth): the cutset and antichain
// critical exponents reduce to min / max over admissible depths of log(c_d)/n(d).
double homogeneous_critical(const CylinderTree& tree, const NodeWeighting& w, bool maximize);

}  // namespace varent
