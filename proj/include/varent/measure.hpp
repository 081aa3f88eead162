#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "varent/tree.hpp"
#include "varent/word.hpp"

namespace varent {

// Additive masses on the nodes of a tree, stored as a root mass and one
// conditional probability per edge (log domain). Additivity holds by
// construction up to rounding; additivity_defect() measures it.
class CylinderMeasure {
public:
    CylinderMeasure(std::shared_ptr<const CylinderTree> tree, double log_root_mass,
                    std::vector<std::vector<double>> log_conditional, bool renormalized = false);

    const CylinderTree& tree() const { return *tree_; }
    std::shared_ptr<const CylinderTree> tree_ptr() const { return tree_; }
    double log_root_mass() const { return log_root_; }
    bool renormalized() const { return renormalized_; }
    double log_conditional(int d, std::size_t edge) const { return log_cond_[static_cast<std::size_t>(d)][edge]; }

    // -inf outside the tree.
    double log_mass(const Word& u) const;
    double mass(const Word& u) const;
    // log masses of x[0..k) for k = 0..len; -inf once x leaves the support.
    std::vector<double> log_prefix_masses(const Word& x, std::size_t len) const;

    // max over classes of |sum_children conditional - 1|.
    double additivity_defect() const;
    CylinderMeasure normalized() const;

    // Draws a depth-D branch with probability proportional to its mass.
    Word sample_branch(std::mt19937_64& rng) const;

    // (word, log mass) for every node; explicit enumeration.
    std::vector<std::pair<Word, double>> entries(std::size_t limit = 5'000'000) const;

private:
    std::shared_ptr<const CylinderTree> tree_;
    double log_root_;
    std::vector<std::vector<double>> log_cond_;
    bool renormalized_;
};

// Product measure; at nodes where the tree forbids some symbols the
// conditional is renormalized over the allowed children and the flag is set.
CylinderMeasure bernoulli(std::shared_ptr<const CylinderTree> tree, std::span<const double> p);
// Markov chain with transition matrix P (row-stochastic) and initial law pi.
// The tree is refined so the last symbol is known at every class.
CylinderMeasure markov(std::shared_ptr<const CylinderTree> tree, const std::vector<std::vector<double>>& P,
                       std::span<const double> pi);

nlohmann::json measure_to_json(const CylinderMeasure& mu, const std::string& tree_ref);
// Rebuilds the explicit tree from the entries and re-validates additivity
// (relative 1e-9).
CylinderMeasure measure_from_json(const nlohmann::json& j);

enum class LocalNormalization {
    time,   // -(1/n) log mu(x[1..n+m])
    depth   // -(1/(n+m)) log mu(x[1..n+m])
};

struct LocalEntropyEstimate {
    Word point;
    int m = 1;
    std::vector<double> values;  // values[n-1] for n = 1..n_max; +inf outside the support
    double liminf_estimate = 0.0;
    double limsup_estimate = 0.0;
    int window_begin = 1;        // tail-third window [window_begin, window_end]
    int window_end = 1;
};

// First n of the tail-third window.
int tail_window_begin(int n_max);

LocalEntropyEstimate local_entropy(const CylinderMeasure& mu, const Word& x, ScaleIndex m, int n_max,
                                   LocalNormalization norm = LocalNormalization::time);

enum class LocalKind { lower, upper };

struct IntegralOptions {
    LocalNormalization norm = LocalNormalization::time;
    std::size_t max_states = 2'000'000;  // exact enumeration cap before Monte-Carlo takes over
    int mc_samples = 4000;
    std::uint64_t seed = 1;
    bool force_monte_carlo = false;
};

struct IntegralEstimate {
    double value = 0.0;
    int n_max = 0;
    int m = 1;
    int window_begin = 1;
    std::string method;   // "exact" or "monte_carlo"
    int samples = 0;
    double standard_error = 0.0;
};

// Integral over branches of the tail-window liminf (lower) or limsup (upper).
IntegralEstimate integral_local_entropy(const CylinderMeasure& mu, ScaleIndex m, int n_max, LocalKind kind,
                                        const IntegralOptions& options = {});

}  // namespace varent
