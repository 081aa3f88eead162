#include "varent/frostman.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "varent/error.hpp"
#include "varent/logmath.hpp"

namespace varent {

FrostmanResult frostman_measure(std::shared_ptr<const CylinderTree> tree, double s, int N, ScaleIndex m, WeightMode mode) {
    auto flow = weighted_cover_value(*tree, s, N, m, mode);
    if (!(flow.log_value > kNegInf)) throw DomainError("empty weighted measure: c = 0");
    const int D = tree->depth();
    std::vector<std::vector<double>> cond(flow.log_share);
    CylinderMeasure mu(tree, 0.0, std::move(cond));

    // Heaviest node of each class, then the worst bound ratio.
    double worst = kNegInf;
    std::vector<double> best{0.0};
    for (int d = 0; d <= D; ++d) {
        if (d >= flow.weighting.min_depth)
            for (double b : best) worst = std::max(worst, flow.log_value + b + s * flow.weighting.exponent(d));
        if (d == D) break;
        std::vector<double> next(tree->class_count(d + 1), kNegInf);
        for (ClassId c = 0; c < tree->class_count(d); ++c) {
            const auto kids = tree->children(d, c);
            const auto base = tree->edge_begin(d, c);
            for (std::size_t i = 0; i < kids.size(); ++i)
                next[kids[i].child] = std::max(next[kids[i].child], best[c] + flow.log_share[static_cast<std::size_t>(d)][base + i]);
        }
        best = std::move(next);
    }
    FrostmanResult out{s, flow.log_value, flow.weighting, std::move(flow), std::move(mu), worst};
    return out;
}

namespace {

// Classes reachable from one root class, per depth, with local indices.
struct SubtreeView {
    int root_depth = 0;
    std::vector<std::vector<ClassId>> classes;                      // [d - root_depth]
    std::vector<std::unordered_map<ClassId, std::size_t>> local;   // class -> position
};

SubtreeView reachable(const CylinderTree& tree, int root_depth, ClassId root, int last_depth) {
    SubtreeView v;
    v.root_depth = root_depth;
    v.classes.push_back({root});
    v.local.push_back({{root, 0}});
    for (int d = root_depth; d < last_depth; ++d) {
        std::vector<ClassId> next;
        std::unordered_map<ClassId, std::size_t> idx;
        for (ClassId c : v.classes.back())
            for (const auto& e : tree.children(d, c))
                if (idx.try_emplace(e.child, next.size()).second) next.push_back(e.child);
        v.classes.push_back(std::move(next));
        v.local.push_back(std::move(idx));
    }
    return v;
}

// Max antichain of the subtree over depths [lo, cap]; returns log g at the root and take flags.
double capped_antichain(const CylinderTree& tree, const SubtreeView& v, int lo, int cap, double s, const NodeWeighting& w,
                        std::vector<std::vector<std::uint8_t>>* take) {
    const int r = v.root_depth;
    std::vector<double> below;
    if (take) take->assign(static_cast<std::size_t>(cap - r) + 1, {});
    for (int d = cap; d >= r; --d) {
        const auto& cls = v.classes[static_cast<std::size_t>(d - r)];
        std::vector<double> here(cls.size());
        std::vector<std::uint8_t> flags(cls.size(), 0);
        const bool admissible = d >= lo;
        const double wt = admissible ? -s * w.exponent(d) : kNegInf;
        for (std::size_t i = 0; i < cls.size(); ++i) {
            if (d == cap) {
                here[i] = wt;
                flags[i] = admissible ? 1 : 0;
                continue;
            }
            LogAccumulator sum;
            const auto& idx = v.local[static_cast<std::size_t>(d - r) + 1];
            for (const auto& e : tree.children(d, cls[i])) sum.add(below[idx.at(e.child)]);
            if (admissible && sum.value() < wt) {
                here[i] = wt;
                flags[i] = 1;
            } else {
                here[i] = sum.value();
            }
        }
        if (take) (*take)[static_cast<std::size_t>(d - r)] = std::move(flags);
        below = std::move(here);
    }
    return below[0];
}

}  // namespace

WindowAntichain antichain_in_window_log(const CylinderTree& tree, int root_depth, ClassId root_class, const Word& root_word,
                                        double s, int N, double log_a, double log_b, ScaleIndex m, WeightMode mode,
                                        int min_node_depth) {
    if (!(log_a < log_b)) throw DomainError("window needs a < b");
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("s must be a finite nonnegative real");
    const int D = tree.depth();
    const double log_gap = log_a == kNegInf ? log_b : log_b + std::log1p(-std::exp(log_a - log_b));  // log(b - a)

    // Smallest N1 >= N whose admissible weights all fall below b - a.
    int N1 = std::max(1, N);
    NodeWeighting w;
    for (;; ++N1) {
        try {
            w = packing_weighting(D, N1, m, mode);
        } catch (const TruncationTooShallow&) {
            throw InfeasibleError("window granularity: no N1 <= D with e^{-s n} < b - a below '" + format_word(root_word) + "'");
        }
        if (-s * w.exponent(std::max(w.min_depth, root_depth + 1)) < log_gap) break;
    }
    const int lo = std::max({w.min_depth, root_depth + 1, min_node_depth});
    if (lo > D) throw InfeasibleError("insufficient packing richness: no admissible depth below '" + format_word(root_word) + "'");
    // Exponents can only grow with depth, so the weight bound at lo covers all deeper nodes.
    if (!(-s * w.exponent(lo) < log_gap))
        throw InfeasibleError("window granularity: weights at depth " + std::to_string(lo) + " exceed b - a");

    const auto view = reachable(tree, root_depth, root_class, D);
    auto value_with_cap = [&](int cap) { return capped_antichain(tree, view, lo, cap, s, w, nullptr); };
    if (!(value_with_cap(D) > log_b))
        throw InfeasibleError("insufficient packing richness: truncated prepacking below '" + format_word(root_word) +
                              "' does not exceed b");
    int left = lo, right = D;  // smallest cap with value > b
    while (left < right) {
        const int mid = left + (right - left) / 2;
        if (value_with_cap(mid) > log_b) right = mid;
        else left = mid + 1;
    }
    std::vector<std::vector<std::uint8_t>> take;
    capped_antichain(tree, view, lo, right, s, w, &take);

    // Push multiplicities down to the selected classes, keeping one representative path per class.
    WindowAntichain out;
    out.N1 = N1;
    out.depth_cap = right;
    std::vector<long double> mult{1.0L};
    std::vector<Word> rep{root_word};
    for (int d = root_depth; d <= right; ++d) {
        const auto k = static_cast<std::size_t>(d - root_depth);
        const auto& cls = view.classes[k];
        std::vector<long double> next_mult(d < right ? view.classes[k + 1].size() : 0, 0.0L);
        std::vector<Word> next_rep(next_mult.size());
        for (std::size_t i = 0; i < cls.size(); ++i) {
            if (mult[i] == 0.0L) continue;
            if (take[k][i]) {
                out.groups.push_back({d, cls[i], mult[i], -s * w.exponent(d), rep[i]});
                continue;
            }
            if (d == right) continue;
            for (const auto& e : tree.children(d, cls[i])) {
                const auto j = view.local[k + 1].at(e.child);
                if (next_mult[j] == 0.0L) {
                    next_rep[j] = rep[i];
                    next_rep[j].push_back(e.symbol);
                }
                next_mult[j] += mult[i];
            }
        }
        mult = std::move(next_mult);
        rep = std::move(next_rep);
    }

    // Trim lightest first until the sum drops below b; each step removes less than b - a.
    std::vector<std::size_t> order(out.groups.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return out.groups[x].log_weight < out.groups[y].log_weight; });
    long double S = 0.0L;  // sum relative to b
    for (const auto& g : out.groups) S += g.count * std::exp(static_cast<long double>(g.log_weight - log_b));
    // Counts can exceed 2^64, so the outcome of removing nodes one at a time is
    // computed directly as the number kept; eps keeps the sum clear of b after rounding.
    constexpr long double eps = 1e-12L;
    for (std::size_t idx : order) {
        if (S < 1.0L - eps) break;
        auto& g = out.groups[idx];
        const long double r = std::exp(static_cast<long double>(g.log_weight - log_b));
        const long double rest = S - g.count * r;
        if (rest >= 1.0L - eps) {
            S = rest;
            out.discarded += g.count;
            g.count = 0;
            continue;
        }
        const long double keep = std::clamp(std::floor((1.0L - eps - rest) / r), 0.0L, g.count);
        out.discarded += g.count - keep;
        g.count = keep;
        S = rest + keep * r;
    }
    out.groups.erase(std::remove_if(out.groups.begin(), out.groups.end(), [](const AntichainGroup& g) { return g.count <= 0; }),
                     out.groups.end());
    LogAccumulator acc;
    for (const auto& g : out.groups) acc.add(static_cast<double>(std::log(g.count)) + g.log_weight);
    out.log_sum = acc.value();
    if (!(out.log_sum < log_b && out.log_sum > log_a))
        throw InfeasibleError("window trimming failed to land in (a, b) below '" + format_word(root_word) + "'");
    return out;
}

WindowAntichain antichain_in_window(const CylinderTree& tree, const Word& u, double s, int N, double a, double b, ScaleIndex m,
                                    WeightMode mode) {
    if (!(a >= 0.0 && a < b)) throw DomainError("window needs 0 <= a < b");
    const auto c = tree.locate(u);
    if (!c) throw DomainError("subtree root '" + format_word(u) + "' is not a node of the tree");
    return antichain_in_window_log(tree, static_cast<int>(u.size()), *c, u, s, N, a > 0.0 ? std::log(a) : kNegInf, std::log(b), m,
                                   mode, 0);
}

double packing_constant() {
    double C = 1.0;
    for (int n = 1; n <= 64; ++n) C *= 1.0 + std::ldexp(1.0, -n);
    return C;
}

PackingFrostmanResult packing_frostman(const CylinderTree& tree, double s, ScaleIndex m, int stages,
                                       const PackingFrostmanOptions& opt) {
    if (stages < 1) throw DomainError("stages must be >= 1");
    PackingFrostmanResult out;
    out.s = s;
    out.m = m.value();
    out.mode = opt.mode;
    out.stages = stages;
    out.constant_C = packing_constant();

    std::vector<std::size_t> stage_begin;
    try {
        const auto first = antichain_in_window_log(tree, 0, 0, Word{}, s, opt.N, 0.0, std::log(2.0), m, opt.mode, 0);
        stage_begin.push_back(0);
        for (const auto& g : first.groups)
            out.groups.push_back({1, g.depth, g.cls, -1, g.count, g.log_weight, 0.0, g.representative});
    } catch (const InfeasibleError& e) {
        throw InfeasibleError(std::string("stage 1, node '': ") + e.what());
    }

    for (int p = 1; p < stages; ++p) {
        const std::size_t begin = stage_begin.back(), end = out.groups.size();
        int deepest = 0;
        for (std::size_t i = begin; i < end; ++i) deepest = std::max(deepest, out.groups[i].depth);
        stage_begin.push_back(end);
        const double widen = std::log1p(std::ldexp(1.0, -(p + 1)));
        for (std::size_t i = begin; i < end; ++i) {
            const PackingGroup parent = out.groups[i];
            try {
                const auto refined = antichain_in_window_log(tree, parent.depth, parent.cls, parent.representative, s, opt.N,
                                                             parent.log_weight, parent.log_weight + widen, m, opt.mode,
                                                             deepest + 1);
                for (const auto& g : refined.groups)
                    out.groups.push_back({p + 1, g.depth, g.cls, static_cast<int>(i), g.count, g.log_weight, 0.0, g.representative});
            } catch (const InfeasibleError& e) {
                throw InfeasibleError("stage " + std::to_string(p + 1) + ", node '" + format_word(parent.representative) +
                                      "': " + e.what());
            }
        }
    }
    stage_begin.push_back(out.groups.size());

    // Final masses bottom-up.
    std::vector<LogAccumulator> acc(out.groups.size());
    for (std::size_t i = out.groups.size(); i-- > 0;) {
        auto& g = out.groups[i];
        g.log_final_mass = g.stage == stages ? g.log_weight : acc[i].value();
        if (g.parent >= 0) acc[static_cast<std::size_t>(g.parent)].add(static_cast<double>(std::log(g.count_per_parent)) + g.log_final_mass);
    }
    LogAccumulator total;
    out.worst_log_ratio = kNegInf;
    const double logC = std::log(out.constant_C);
    for (const auto& g : out.groups) {
        if (g.stage == 1) total.add(static_cast<double>(std::log(g.count_per_parent)) + g.log_final_mass);
        out.worst_log_ratio = std::max(out.worst_log_ratio, g.log_final_mass - logC - g.log_weight);
    }
    out.log_total_mass = total.value();
    out.bound_holds = out.worst_log_ratio <= 1e-12;
    for (int p = 1; p <= stages; ++p) {
        int lo = tree.depth(), hi = 0;
        for (std::size_t i = stage_begin[static_cast<std::size_t>(p) - 1]; i < stage_begin[static_cast<std::size_t>(p)]; ++i) {
            lo = std::min(lo, out.groups[i].depth);
            hi = std::max(hi, out.groups[i].depth);
        }
        out.stage_min_depth.push_back(lo);
        out.stage_max_depth.push_back(hi);
    }
    return out;
}

CylinderMeasure PackingFrostmanResult::to_measure(std::shared_ptr<const CylinderTree> tree) const {
    if (!tree->is_explicit()) throw DomainError("packing-Frostman measure extension needs an explicit tree");
    const int D = tree->depth();
    // Node mass: selected final-stage nodes carry their mass; ancestors sum it up;
    // below a final node the first child carries everything.
    std::vector<std::vector<double>> lm(static_cast<std::size_t>(D) + 1);
    for (int d = 0; d <= D; ++d) lm[static_cast<std::size_t>(d)].assign(tree->class_count(d), kNegInf);
    std::vector<std::vector<char>> final_node(static_cast<std::size_t>(D) + 1);
    for (int d = 0; d <= D; ++d) final_node[static_cast<std::size_t>(d)].assign(tree->class_count(d), 0);
    for (const auto& g : groups)
        if (g.stage == stages) {
            lm[static_cast<std::size_t>(g.depth)][g.cls] = g.log_final_mass;
            final_node[static_cast<std::size_t>(g.depth)][g.cls] = 1;
        }
    for (int d = 0; d < D; ++d)
        for (ClassId c = 0; c < tree->class_count(d); ++c)
            if (final_node[static_cast<std::size_t>(d)][c]) {
                // Dirac continuation along first children.
                ClassId cur = c;
                for (int k = d; k < D; ++k) {
                    const auto kids = tree->children(k, cur);
                    cur = kids.front().child;
                    lm[static_cast<std::size_t>(k) + 1][cur] = lm[static_cast<std::size_t>(d)][c];
                }
            }
    for (int d = D - 1; d >= 0; --d)
        for (ClassId c = 0; c < tree->class_count(d); ++c) {
            if (final_node[static_cast<std::size_t>(d)][c]) continue;
            LogAccumulator sum;
            for (const auto& e : tree->children(d, c)) sum.add(lm[static_cast<std::size_t>(d) + 1][e.child]);
            if (sum.value() > kNegInf) lm[static_cast<std::size_t>(d)][c] = sum.value();
        }
    std::vector<std::vector<double>> cond(static_cast<std::size_t>(D) + 1);
    for (int d = 0; d < D; ++d) {
        cond[static_cast<std::size_t>(d)].resize(tree->edge_count(d));
        for (ClassId c = 0; c < tree->class_count(d); ++c) {
            const auto kids = tree->children(d, c);
            const auto base = tree->edge_begin(d, c);
            const double parent = lm[static_cast<std::size_t>(d)][c];
            for (std::size_t i = 0; i < kids.size(); ++i)
                cond[static_cast<std::size_t>(d)][base + i] = parent == kNegInf ? -std::log(static_cast<double>(kids.size()))
                                                                                : lm[static_cast<std::size_t>(d) + 1][kids[i].child] - parent;
        }
    }
    if (!(lm[0][0] > kNegInf)) throw DomainError("packing-Frostman measure has zero total mass");
    return CylinderMeasure(std::move(tree), 0.0, std::move(cond));
}

}  // namespace varent
