#include "varent/exact.hpp"

#include <cmath>

#include "dp_core.hpp"
#include "varent/error.hpp"

namespace varent::exact {

namespace {

struct RationalOps {
    using value_type = Rational;
    std::vector<Rational> powers;  // x^k for k = 0..D
    Rational weight(int n) const {
        if (n < 0 || static_cast<std::size_t>(n) >= powers.size()) throw DomainError("exponent outside the power table");
        return powers[static_cast<std::size_t>(n)];
    }
    Rational zero() const { return Rational(0); }
    Rational add(const Rational& a, const Rational& b) const { return a + b; }
    bool less(const Rational& a, const Rational& b) const { return a < b; }
};

RationalOps make_ops(const Rational& x, int D) {
    if (x <= 0 || x > 1) throw DomainError("exact base x must lie in (0, 1]");
    RationalOps ops;
    ops.powers.resize(static_cast<std::size_t>(D) + 1);
    ops.powers[0] = 1;
    for (int k = 1; k <= D; ++k) ops.powers[static_cast<std::size_t>(k)] = ops.powers[static_cast<std::size_t>(k) - 1] * x;
    return ops;
}

void check(const CylinderTree& tree, const NodeWeighting& w) {
    if (w.min_depth > tree.depth()) throw TruncationTooShallow("admissible depth exceeds D");
}

}  // namespace

Rational base_for(double s, long long max_denominator) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("s must be a finite nonnegative real");
    const double target = std::exp(-s);
    // Continued-fraction convergents of e^{-s}, stopping at the denominator bound
    // or when the convergent reproduces the double exactly.
    long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double r = target;
    for (int it = 0; it < 64; ++it) {
        const double a = std::floor(r);
        const long long ai = static_cast<long long>(a);
        const long long h2 = ai * h1 + h0, k2 = ai * k1 + k0;
        if (k2 > max_denominator) break;
        h0 = h1, h1 = h2, k0 = k1, k1 = k2;
        if (static_cast<double>(h1) / static_cast<double>(k1) == target) break;
        const double frac = r - a;
        if (frac <= 0.0) break;
        r = 1.0 / frac;
    }
    if (k1 == 0) return Rational(1);
    return Rational(h1, k1);
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

std::string to_string(const Rational& q) { return q.str(); }

Rational power(const Rational& x, int n) {
    Rational r = 1;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

Rational min_cutset_value(const CylinderTree& tree, const Rational& x, const NodeWeighting& w) {
    check(tree, w);
    return detail::cutset_table(tree, w, make_ops(x, tree.depth())).value[0][0];
}

Rational max_antichain_value(const CylinderTree& tree, const Rational& x, const NodeWeighting& w) {
    check(tree, w);
    return detail::antichain_table(tree, w, make_ops(x, tree.depth())).value[0][0];
}

Rational weighted_cover_value(const CylinderTree& tree, const Rational& x, const NodeWeighting& w) {
    check(tree, w);
    const auto ops = make_ops(x, tree.depth());
    const int D = tree.depth();
    std::vector<Rational> below;
    for (int d = D; d >= 0; --d) {
        std::vector<Rational> here(tree.class_count(d));
        const bool capped = d >= w.min_depth;
        for (ClassId c = 0; c < here.size(); ++c) {
            if (d == D) {
                here[c] = ops.weight(w.exponent(d));
                continue;
            }
            Rational sum = 0;
            for (const auto& e : tree.children(d, c)) sum += below[e.child];
            here[c] = capped ? std::min(sum, ops.weight(w.exponent(d))) : sum;
        }
        below = std::move(here);
    }
    return below[0];
}

Frostman frostman_masses(const CylinderTree& tree, const Rational& x, const NodeWeighting& w) {
    check(tree, w);
    if (!tree.is_explicit()) throw DomainError("exact Frostman masses need an explicit tree");
    const auto ops = make_ops(x, tree.depth());
    const int D = tree.depth();
    std::vector<std::vector<Rational>> F(static_cast<std::size_t>(D) + 1);
    for (int d = D; d >= 0; --d) {
        auto& here = F[static_cast<std::size_t>(d)];
        here.resize(tree.class_count(d));
        const bool capped = d >= w.min_depth;
        for (ClassId c = 0; c < here.size(); ++c) {
            if (d == D) {
                here[c] = ops.weight(w.exponent(d));
                continue;
            }
            Rational sum = 0;
            for (const auto& e : tree.children(d, c)) sum += F[static_cast<std::size_t>(d) + 1][e.child];
            here[c] = capped ? std::min(sum, ops.weight(w.exponent(d))) : sum;
        }
    }
    Frostman out;
    out.c = F[0][0];
    if (out.c == 0) throw DomainError("empty weighted measure (c = 0)");
    out.mass.resize(static_cast<std::size_t>(D) + 1);
    out.mass[0] = {Rational(1)};
    for (int d = 0; d < D; ++d) {
        out.mass[static_cast<std::size_t>(d) + 1].resize(tree.class_count(d + 1));
        for (ClassId c = 0; c < tree.class_count(d); ++c) {
            Rational through = 0;
            for (const auto& e : tree.children(d, c)) through += F[static_cast<std::size_t>(d) + 1][e.child];
            for (const auto& e : tree.children(d, c))
                out.mass[static_cast<std::size_t>(d) + 1][e.child] =
                    out.mass[static_cast<std::size_t>(d)][c] * F[static_cast<std::size_t>(d) + 1][e.child] / through;
        }
    }
    return out;
}

}  // namespace varent::exact
