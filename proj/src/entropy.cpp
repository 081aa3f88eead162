#include "varent/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "varent/error.hpp"
#include "varent/logmath.hpp"

namespace varent {

namespace {

void check_tol(double tol) {
    if (!(tol > 0.0)) throw DomainError("tol must be > 0");
}

int default_N(const CylinderTree& tree, const EntropyOptions& opt) {
    const int N = opt.N.value_or(std::max(1, tree.depth() / 2));
    if (N < 1) throw DomainError("N must be >= 1");
    return N;
}

// Shared driver: bisection of log value(s) > 0 with an upper end that is pushed
// out while still subcritical.
Bracket critical_bracket(const std::function<double(double)>& log_value, double start_hi, double tol, int max_iter) {
    auto above = [&](double s) { return log_value(s) > 0.0; };
    double hi = std::max(start_hi, tol);
    int guard = 0;
    while (above(hi)) {
        hi *= 2.0;
        if (++guard > 60) throw DomainError("critical exponent is unbounded");
    }
    return bisect_critical(above, 0.0, hi, tol, max_iter);
}

EntropyEstimate finish(EntropyKind kind, const Bracket& b, const CylinderTree& tree, int N, ScaleIndex m, WeightMode mode) {
    EntropyEstimate est;
    est.kind = kind;
    est.s_low = b.lo;
    est.s_high = b.hi;
    est.value = 0.5 * (b.lo + b.hi);
    est.depth_used = tree.depth();
    est.N_used = N;
    est.m = m.value();
    est.mode = mode;
    est.iterations = b.iterations;
    return est;
}

using ValueAt = std::function<double(const CylinderTree&, double, int)>;

// Diagnostics common to the cutset-type estimates: values at several N at the
// estimate, then the estimate recomputed at shallower truncations.
void add_truncation_diagnostics(EntropyEstimate& est, const CylinderTree& tree, ScaleIndex m, double tol,
                                const EntropyOptions& opt, const ValueAt& value_at, const char* value_label,
                                bool packing_like) {
    const int D = tree.depth();
    const int need = packing_like ? m.value() - 1 : m.value();
    for (int N : {1, std::max(1, D / 4), std::max(1, D / 2)}) {
        if (N + need > D) continue;
        est.diagnostics.push_back({value_label, D, N, m.value(), est.value, value_at(tree, est.value, N)});
    }
    std::vector<std::pair<int, double>> by_depth;
    for (int Dp : {D / 2, (3 * D) / 4}) {
        const int Np = std::max(1, Dp / 2);
        if (Dp < 2 || Np + need > Dp) continue;
        const auto sub = tree.truncate(Dp);
        const auto b = critical_bracket([&](double s) { return value_at(sub, s, Np); }, std::log(tree.alphabet().size()),
                                        tol, opt.max_iterations);
        const double v = 0.5 * (b.lo + b.hi);
        by_depth.emplace_back(Dp, v);
        est.diagnostics.push_back({"estimate_at_depth", Dp, Np, m.value(), v, v});
    }
    est.diagnostics.push_back({"estimate_at_depth", D, est.N_used, m.value(), est.value, est.value});
    if (!by_depth.empty()) {
        const double spread = std::abs(by_depth.back().second - est.value);
        if (spread > opt.convergence_spread) {
            est.converged = false;
            est.note = "estimates at depths " + std::to_string(by_depth.back().first) + " and " + std::to_string(D) +
                       " differ by " + std::to_string(spread);
        }
    }
}

}  // namespace

const char* to_string(EntropyKind kind) {
    switch (kind) {
    case EntropyKind::bowen: return "bowen";
    case EntropyKind::packing: return "packing";
    case EntropyKind::capacity: return "capacity";
    case EntropyKind::weighted: return "weighted";
    }
    return "?";
}

Bracket bisect_critical(const std::function<bool(double)>& above, double lo, double hi, double tol, int max_iterations) {
    check_tol(tol);
    Bracket b{lo, hi, 0};
    if (!above(lo)) {
        b.hi = lo;
        return b;
    }
    while (b.hi - b.lo > tol && b.iterations < max_iterations) {
        const double mid = 0.5 * (b.lo + b.hi);
        if (above(mid)) b.lo = mid;
        else b.hi = mid;
        ++b.iterations;
    }
    return b;
}

EntropyEstimate bowen_entropy(const CylinderTree& tree, ScaleIndex m, double tol, const EntropyOptions& opt) {
    check_tol(tol);
    const int N = default_N(tree, opt);
    cover_weighting(tree.depth(), N, m, opt.mode);
    const ValueAt value_at = [&](const CylinderTree& t, double s, int n) {
        return min_cutset_value(t, s, n, m, opt.mode).log_value;
    };
    const auto b = critical_bracket([&](double s) { return value_at(tree, s, N); }, std::log(tree.alphabet().size()), tol,
                                    opt.max_iterations);
    auto est = finish(EntropyKind::bowen, b, tree, N, m, opt.mode);
    if (opt.diagnostics) add_truncation_diagnostics(est, tree, m, tol, opt, value_at, "log_M", false);
    return est;
}

EntropyEstimate weighted_entropy(const CylinderTree& tree, ScaleIndex m, double tol, const EntropyOptions& opt) {
    check_tol(tol);
    const int N = default_N(tree, opt);
    cover_weighting(tree.depth(), N, m, opt.mode);
    const ValueAt value_at = [&](const CylinderTree& t, double s, int n) {
        return weighted_cover_value(t, s, n, m, opt.mode).log_value;
    };
    const auto b = critical_bracket([&](double s) { return value_at(tree, s, N); }, std::log(tree.alphabet().size()), tol,
                                    opt.max_iterations);
    auto est = finish(EntropyKind::weighted, b, tree, N, m, opt.mode);
    if (opt.diagnostics) add_truncation_diagnostics(est, tree, m, tol, opt, value_at, "log_W", false);
    return est;
}

EntropyEstimate packing_entropy(const CylinderTree& tree, ScaleIndex m, double tol, const EntropyOptions& opt) {
    check_tol(tol);
    const int D = tree.depth();
    const int N = default_N(tree, opt);
    packing_weighting(D, N, m, opt.mode);
    // D0 = floor(D/2) and N' ranging over [N, max(N, D/2)].
    auto regularized = [&](const CylinderTree& t, double s, int n, ScaleIndex mm) {
        return packing_regularized(t, s, mm, n, t.depth() / 2, opt.mode).log_value;
    };
    const auto b = critical_bracket([&](double s) { return regularized(tree, s, N, m); }, std::log(tree.alphabet().size()),
                                    tol, opt.max_iterations);
    auto est = finish(EntropyKind::packing, b, tree, N, m, opt.mode);
    if (!opt.diagnostics) return est;
    for (int n : {1, std::max(1, D / 4), std::max(1, D / 2)}) {
        if (n + m.value() - 1 > D) continue;
        est.diagnostics.push_back({"log_P", D, n, m.value(), est.value, max_antichain_value(tree, est.value, n, m, opt.mode).log_value});
    }
    // Finer scales (larger m) should not lower the estimate.
    for (int mm = 1; mm <= m.value() + 1; ++mm) {
        if (N + mm - 1 > D) break;
        const auto bm = critical_bracket([&](double s) { return regularized(tree, s, N, ScaleIndex(mm)); },
                                         std::log(tree.alphabet().size()), tol, opt.max_iterations);
        est.diagnostics.push_back({"estimate_at_m", D, N, mm, 0.5 * (bm.lo + bm.hi), 0.5 * (bm.lo + bm.hi)});
    }
    return est;
}

EntropyEstimate capacity_entropy(const CylinderTree& tree, ScaleIndex m, double tol, const EntropyOptions& opt) {
    check_tol(tol);
    const int D = tree.depth();
    if (D < m.value() + 2) throw DomainError("capacity entropy needs D >= m + 2");
    const int N = default_N(tree, opt);
    const auto logc = tree.log_depth_counts();
    EntropyEstimate est;
    est.kind = EntropyKind::capacity;
    est.depth_used = D;
    est.N_used = N;
    est.m = m.value();
    est.mode = opt.mode;
    double best = 0.0;
    bool any = false;
    // Maximal (n, e^{-m})-separated sets are exactly the depth-(n+m-1) node sets,
    // and so are minimal spanning sets, so r_n and its spanning twin coincide.
    for (int n = N; n + m.value() - 1 <= D; ++n) {
        const int d = n + m.value() - 1;
        const double norm = opt.mode == WeightMode::ball ? n : d;
        const double slope = logc[static_cast<std::size_t>(d)] / norm;
        if (!any || slope > best) best = slope;
        any = true;
        if (opt.diagnostics) est.diagnostics.push_back({"slope", d, n, m.value(), slope, logc[static_cast<std::size_t>(d)]});
    }
    if (!any) throw TruncationTooShallow("no n >= N with n+m-1 <= D");
    est.value = est.s_low = est.s_high = std::max(0.0, best);
    if (opt.diagnostics) {
        const int n = D - m.value() + 1;
        est.diagnostics.push_back({"log_separated_count", D, n, m.value(), est.value, logc[static_cast<std::size_t>(D)]});
        est.diagnostics.push_back({"log_spanning_count", D, n, m.value(), est.value, logc[static_cast<std::size_t>(D)]});
    }
    return est;
}

double homogeneous_critical(const CylinderTree& tree, const NodeWeighting& w, bool maximize) {
    if (!tree.homogeneous()) throw DomainError("closed form needs a homogeneous tree");
    const auto logc = tree.log_depth_counts();
    double best = maximize ? kNegInf : kPosInf;
    for (int d = w.min_depth; d <= tree.depth(); ++d) {
        const double r = logc[static_cast<std::size_t>(d)] / w.exponent(d);
        best = maximize ? std::max(best, r) : std::min(best, r);
    }
    return std::max(0.0, best);
}

}  // namespace varent
