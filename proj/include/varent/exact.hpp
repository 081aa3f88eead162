#pragma once

#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "varent/engines.hpp"
#include "varent/tree.hpp"

// Exact-rational engines for small trees. Weights are x^{n(u)} with x a rational
// stand-in for e^{-s}: exact for s = ln 2 (x = 1/2), a best rational
// approximation otherwise. DP and oracle share x, so comparisons are exact.
namespace varent::exact {

using Rational = boost::multiprecision::cpp_rational;

Rational base_for(double s, long long max_denominator = 1'000'000);
double to_double(const Rational& q);
std::string to_string(const Rational& q);

Rational min_cutset_value(const CylinderTree& tree, const Rational& x, const NodeWeighting& w);
Rational max_antichain_value(const CylinderTree& tree, const Rational& x, const NodeWeighting& w);
Rational weighted_cover_value(const CylinderTree& tree, const Rational& x, const NodeWeighting& w);

// Normalized flow masses on an explicit tree, one entry per node (class).
struct Frostman {
    Rational c;
    std::vector<std::vector<Rational>> mass;
};
Frostman frostman_masses(const CylinderTree& tree, const Rational& x, const NodeWeighting& w);

Rational power(const Rational& x, int n);

}  // namespace varent::exact
