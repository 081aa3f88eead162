#include "varent/engines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dp_core.hpp"
#include "varent/error.hpp"
#include "varent/logmath.hpp"

namespace varent {

namespace {

struct LogOps {
    using value_type = double;
    double s;
    double weight(int n) const { return -s * n; }
    double zero() const { return kNegInf; }
    double add(double a, double b) const { return log_add(a, b); }
    bool less(double a, double b) const { return a < b; }
};

void check_s(double s) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("s must be a finite nonnegative real");
}

void check_admissible(const NodeWeighting& w, int D) {
    if (w.min_depth > D)
        throw TruncationTooShallow("admissible depth " + std::to_string(w.min_depth) + " exceeds D = " + std::to_string(D));
}

// Topmost flagged classes reached from the root, expanded to words.
std::vector<Word> topmost_nodes(const CylinderTree& tree, const std::vector<std::vector<std::uint8_t>>& flag,
                                std::size_t limit) {
    std::vector<Word> out;
    std::vector<std::pair<Word, ClassId>> frontier{{Word{}, 0}};
    for (int d = 0; d <= tree.depth() && !frontier.empty(); ++d) {
        std::vector<std::pair<Word, ClassId>> next;
        for (auto& [w, c] : frontier) {
            if (flag[static_cast<std::size_t>(d)][c]) {
                out.push_back(w);
                if (out.size() > limit) throw DomainError("selected node set exceeds enumeration limit");
                continue;
            }
            if (d == tree.depth()) continue;
            for (const auto& e : tree.children(d, c)) {
                Word child = w;
                child.push_back(e.symbol);
                next.emplace_back(std::move(child), e.child);
            }
        }
        frontier = std::move(next);
    }
    return out;
}

}  // namespace

const char* to_string(WeightMode mode) {
    switch (mode) {
    case WeightMode::ball: return "ball";
    case WeightMode::clopen: return "clopen";
    case WeightMode::depth: return "depth";
    }
    return "?";
}

WeightMode weight_mode_from_string(const std::string& name) {
    if (name == "ball") return WeightMode::ball;
    if (name == "clopen") return WeightMode::clopen;
    if (name == "depth") return WeightMode::depth;
    throw DomainError("unknown weight mode '" + name + "' (ball|clopen|depth)");
}

NodeWeighting cover_weighting(int D, int N, ScaleIndex m, WeightMode mode) {
    if (N < 1) throw DomainError("N must be >= 1");
    NodeWeighting w;
    switch (mode) {
    case WeightMode::ball: w = {N + m.value(), m.value()}; break;
    case WeightMode::clopen: w = {N, 0}; break;
    case WeightMode::depth: w = {N + m.value(), 0}; break;
    }
    check_admissible(w, D);
    return w;
}

NodeWeighting packing_weighting(int D, int N, ScaleIndex m, WeightMode mode) {
    if (N < 1) throw DomainError("N must be >= 1");
    NodeWeighting w;
    switch (mode) {
    case WeightMode::ball: w = {N + m.value() - 1, m.value() - 1}; break;
    case WeightMode::clopen: w = {N, 0}; break;
    case WeightMode::depth: w = {N + m.value() - 1, 0}; break;
    }
    check_admissible(w, D);
    return w;
}

double CutsetResult::value() const { return std::exp(log_value); }
double AntichainResult::value() const { return std::exp(log_value); }
double FlowResult::value() const { return std::exp(log_value); }

std::vector<Word> CutsetResult::nodes(const CylinderTree& tree, std::size_t limit) const {
    return topmost_nodes(tree, cut, limit);
}

std::vector<Word> AntichainResult::nodes(const CylinderTree& tree, std::size_t limit) const {
    return topmost_nodes(tree, take, limit);
}

double FlowResult::log_node_flow(const CylinderTree& tree, const Word& u) const {
    double lf = log_value;
    ClassId c = 0;
    for (std::size_t d = 0; d < u.size(); ++d) {
        const auto kids = tree.children(static_cast<int>(d), c);
        const auto base = tree.edge_begin(static_cast<int>(d), c);
        bool found = false;
        for (std::size_t i = 0; i < kids.size(); ++i)
            if (kids[i].symbol == u[d]) {
                lf += log_share[d][base + i];
                c = kids[i].child;
                found = true;
                break;
            }
        if (!found) return kNegInf;
    }
    return lf;
}

CutsetResult min_cutset_weighted(const CylinderTree& tree, double s, const NodeWeighting& w) {
    check_s(s);
    check_admissible(w, tree.depth());
    auto table = detail::cutset_table(tree, w, LogOps{s});
    CutsetResult r;
    r.s = s;
    r.weighting = w;
    r.log_value = table.value[0][0];
    r.log_subtree = std::move(table.value);
    r.cut = std::move(table.flag);
    return r;
}

CutsetResult min_cutset_value(const CylinderTree& tree, double s, int N, ScaleIndex m, WeightMode mode) {
    return min_cutset_weighted(tree, s, cover_weighting(tree.depth(), N, m, mode));
}

AntichainResult max_antichain_weighted(const CylinderTree& tree, double s, const NodeWeighting& w) {
    check_s(s);
    check_admissible(w, tree.depth());
    auto table = detail::antichain_table(tree, w, LogOps{s});
    AntichainResult r;
    r.s = s;
    r.weighting = w;
    r.log_value = table.value[0][0];
    r.log_subtree = std::move(table.value);
    r.take = std::move(table.flag);
    return r;
}

AntichainResult max_antichain_value(const CylinderTree& tree, double s, int N, ScaleIndex m, WeightMode mode) {
    return max_antichain_weighted(tree, s, packing_weighting(tree.depth(), N, m, mode));
}

FlowResult weighted_cover_weighted(const CylinderTree& tree, double s, const NodeWeighting& w) {
    check_s(s);
    check_admissible(w, tree.depth());
    const int D = tree.depth();
    FlowResult r;
    r.s = s;
    r.weighting = w;
    r.log_subtree.resize(static_cast<std::size_t>(D) + 1);
    r.log_share.resize(static_cast<std::size_t>(D) + 1);
    // F(u) = min(cap(u), sum_children F); computed here rather than through the
    // cutset table so that the two sides of the duality check stay independent code.
    for (int d = D; d >= 0; --d) {
        const auto n = tree.class_count(d);
        auto& F = r.log_subtree[static_cast<std::size_t>(d)];
        F.resize(n);
        const double cap = d >= w.min_depth ? -s * w.exponent(d) : kPosInf;
        auto& share = r.log_share[static_cast<std::size_t>(d)];
        share.resize(tree.edge_count(d));
        for (ClassId c = 0; c < n; ++c) {
            if (d == D) {
                F[c] = cap;
                continue;
            }
            const auto kids = tree.children(d, c);
            const auto base = tree.edge_begin(d, c);
            LogAccumulator acc;
            for (const auto& e : kids) acc.add(r.log_subtree[static_cast<std::size_t>(d) + 1][e.child]);
            const double through = acc.value();
            F[c] = std::min(cap, through);
            for (std::size_t i = 0; i < kids.size(); ++i)
                share[base + i] = r.log_subtree[static_cast<std::size_t>(d) + 1][kids[i].child] - through;
        }
    }
    r.log_value = r.log_subtree[0][0];
    return r;
}

FlowResult weighted_cover_value(const CylinderTree& tree, double s, int N, ScaleIndex m, WeightMode mode) {
    return weighted_cover_weighted(tree, s, cover_weighting(tree.depth(), N, m, mode));
}

DualityCertificate certify_duality(const CylinderTree& tree, const FlowResult& flow, const CutsetResult& cut) {
    const int D = tree.depth();
    DualityCertificate cert;
    cert.log_flow_value = flow.log_value;

    // Conservation and feasibility: track the largest node flow in each class.
    cert.conserving = true;
    cert.flow_feasible = true;
    std::vector<double> best{flow.log_value};
    for (int d = 0; d <= D; ++d) {
        if (d >= flow.weighting.min_depth) {
            const double cap = -flow.s * flow.weighting.exponent(d);
            for (double b : best)
                if (b > cap + 1e-12 * std::max(1.0, std::abs(cap))) cert.flow_feasible = false;
        }
        if (d == D) break;
        std::vector<double> next(tree.class_count(d + 1), kNegInf);
        for (ClassId c = 0; c < tree.class_count(d); ++c) {
            const auto kids = tree.children(d, c);
            const auto base = tree.edge_begin(d, c);
            LogAccumulator total;
            for (std::size_t i = 0; i < kids.size(); ++i) {
                const double sh = flow.log_share[static_cast<std::size_t>(d)][base + i];
                total.add(sh);
                next[kids[i].child] = std::max(next[kids[i].child], best[c] + sh);
            }
            if (std::abs(total.value()) > 1e-12) cert.conserving = false;
        }
        best = std::move(next);
    }

    // Coverage: every leaf class is cut, so coverage fails only on a malformed table.
    std::vector<char> covered(tree.class_count(D), 0);
    for (ClassId c = 0; c < tree.class_count(D); ++c) covered[c] = cut.cut[static_cast<std::size_t>(D)][c] != 0;
    for (int d = D - 1; d >= 0; --d) {
        std::vector<char> up(tree.class_count(d), 0);
        for (ClassId c = 0; c < tree.class_count(d); ++c) {
            bool all = true;
            for (const auto& e : tree.children(d, c)) all = all && covered[e.child];
            up[c] = cut.cut[static_cast<std::size_t>(d)][c] || all;
        }
        covered = std::move(up);
    }
    cert.cut_covers = covered[0] != 0;

    // Weight of the chosen cut, summing multiplicities of uncut paths into each cut class.
    LogAccumulator weight;
    std::vector<double> reach{0.0};
    for (int d = 0; d <= D; ++d) {
        const bool admissible = d >= cut.weighting.min_depth;
        std::vector<LogAccumulator> next(d < D ? tree.class_count(d + 1) : 0);
        for (ClassId c = 0; c < tree.class_count(d); ++c) {
            if (reach[c] == kNegInf) continue;
            if (cut.cut[static_cast<std::size_t>(d)][c]) {
                if (!admissible) cert.cut_covers = false;
                weight.add(reach[c] - cut.s * cut.weighting.exponent(d));
                continue;
            }
            for (const auto& e : tree.children(d, c)) next[e.child].add(reach[c]);
        }
        if (d == D) break;
        reach.assign(next.size(), kNegInf);
        for (std::size_t i = 0; i < next.size(); ++i) reach[i] = next[i].value();
    }
    cert.log_cut_weight = weight.value();
    cert.relative_gap = std::abs(std::expm1(cert.log_cut_weight - cert.log_flow_value));
    return cert;
}

PackingRegularized packing_regularized(const CylinderTree& tree, double s, ScaleIndex m, int N, int D0, WeightMode mode,
                                       std::optional<int> N_cap) {
    check_s(s);
    const int D = tree.depth();
    if (D0 < 0 || 2 * D0 > D) throw DomainError("decomposition depth D0 must satisfy 0 <= D0 <= D/2");
    const int cap = std::max(N, N_cap.value_or(D / 2));
    PackingRegularized out;
    out.D0 = D0;
    out.N = N;
    out.N_cap = cap;

    // V(u) = min over N' of max(ancestor ball, best packing inside u) for depth(u) <= D0.
    std::vector<std::vector<double>> part(static_cast<std::size_t>(D0) + 1);
    for (int d = 0; d <= D0; ++d) part[static_cast<std::size_t>(d)].assign(tree.class_count(d), kPosInf);
    for (int n = N; n <= cap; ++n) {
        NodeWeighting w;
        try {
            w = packing_weighting(D, n, m, mode);
        } catch (const TruncationTooShallow&) {
            if (n == N) throw;
            break;
        }
        const auto table = detail::antichain_table(tree, w, LogOps{s});
        if (n == N) out.log_prepacking = table.value[0][0];
        for (int d = 0; d <= D0; ++d) {
            const double anc = d > w.min_depth ? -s * w.exponent(w.min_depth) : kNegInf;
            auto& row = part[static_cast<std::size_t>(d)];
            for (ClassId c = 0; c < row.size(); ++c)
                row[c] = std::min(row[c], std::max(anc, table.value[static_cast<std::size_t>(d)][c]));
        }
    }

    // R(u) = min(V(u), sum_children R); ties keep the coarser part.
    std::vector<double> R = part[static_cast<std::size_t>(D0)];
    std::vector<double> parts(R.size(), 0.0);
    for (int d = D0 - 1; d >= 0; --d) {
        std::vector<double> up(tree.class_count(d)), up_parts(tree.class_count(d));
        for (ClassId c = 0; c < tree.class_count(d); ++c) {
            LogAccumulator sum, count;
            for (const auto& e : tree.children(d, c)) {
                sum.add(R[e.child]);
                count.add(parts[e.child]);
            }
            const double own = part[static_cast<std::size_t>(d)][c];
            if (own <= sum.value()) {
                up[c] = own;
                up_parts[c] = 0.0;
            } else {
                up[c] = sum.value();
                up_parts[c] = count.value();
            }
        }
        R = std::move(up);
        parts = std::move(up_parts);
    }
    out.log_value = R[0];
    out.log_parts = parts[0];
    return out;
}

VitaliSelection vitali_select(std::span<const BowenBallSpec> balls) {
    if (balls.empty()) throw DomainError("vitali_select needs a nonempty family");
    for (const auto& b : balls)
        if (b.n != balls.front().n) throw DomainError("vitali_select: balls must share the same n (same d_n metric)");
    std::vector<Word> cyl;
    cyl.reserve(balls.size());
    for (const auto& b : balls) cyl.push_back(b.cylinder());
    std::vector<std::size_t> order(balls.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return balls[a].m.value() < balls[b].m.value(); });

    auto overlap = [&](std::size_t a, std::size_t b) { return is_prefix(cyl[a], cyl[b]) || is_prefix(cyl[b], cyl[a]); };
    VitaliSelection out;
    for (std::size_t i : order) {
        bool free = true;
        for (std::size_t j : out.selected)
            if (overlap(i, j)) {
                free = false;
                break;
            }
        if (free) out.selected.push_back(i);
    }
    out.disjoint = true;
    for (std::size_t a = 0; a < out.selected.size(); ++a)
        for (std::size_t b = a + 1; b < out.selected.size(); ++b)
            if (overlap(out.selected[a], out.selected[b])) out.disjoint = false;

    // Dilated cylinders: factor 1 keeps the cylinder; radius 5e^{-m} < e^{-(m-2)}
    // gives d_n <= e^{-(m-1)}, a closed ball of cylinder length n+m-2.
    auto dilated = [&](std::size_t j, int shrink) {
        const auto len = static_cast<std::size_t>(std::max(0, static_cast<int>(cyl[j].size()) - shrink));
        return Word(cyl[j].begin(), cyl[j].begin() + static_cast<std::ptrdiff_t>(len));
    };
    auto covers = [&](int shrink) {
        for (std::size_t i = 0; i < balls.size(); ++i) {
            bool inside = false;
            for (std::size_t j : out.selected)
                if (is_prefix(dilated(j, shrink), cyl[i])) {
                    inside = true;
                    break;
                }
            if (!inside) return false;
        }
        return true;
    };
    out.covers_factor1 = covers(0);
    // Factor-5 dilation is taken relative to the open-ball cylinder n+m.
    out.covers_factor5 = true;
    for (std::size_t i = 0; i < balls.size() && out.covers_factor5; ++i) {
        bool inside = false;
        for (std::size_t j : out.selected) {
            const auto& b = balls[j];
            const int len = std::max(0, b.n + b.m.value() - 2);
            Word d(b.center.begin(), b.center.begin() + std::min<std::ptrdiff_t>(len, static_cast<std::ptrdiff_t>(b.center.size())));
            if (is_prefix(d, cyl[i])) {
                inside = true;
                break;
            }
        }
        out.covers_factor5 = inside;
    }
    return out;
}

}  // namespace varent
