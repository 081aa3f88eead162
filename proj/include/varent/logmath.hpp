#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <utility>

namespace varent {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

// Streaming log-sum-exp. The result depends on insertion order only through
// rounding, and the order is always the tree's edge order.
class LogAccumulator {
public:
    void add(double x) {
        if (x == kNegInf) return;
        if (max_ == kNegInf) {
            max_ = x;
            scaled_ = 1.0;
        } else if (x <= max_) {
            scaled_ += std::exp(x - max_);
        } else {
            scaled_ = scaled_ * std::exp(max_ - x) + 1.0;
            max_ = x;
        }
    }
    void add_scaled(double x, double log_count) { add(x + log_count); }
    double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(scaled_); }

private:
    double max_ = kNegInf;
    double scaled_ = 0.0;
};

inline double log_sum_exp(std::span<const double> xs) {
    LogAccumulator acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

// |log a - log b| as a relative-difference proxy; equal infinities compare equal.
inline double log_gap(double la, double lb) {
    if (la == lb) return 0.0;
    return std::abs(la - lb);
}

}  // namespace varent
