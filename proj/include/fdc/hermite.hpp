#pragma once

#include "fdc/polynomial.hpp"

#include <map>
#include <vector>

namespace fdc {

// Monic h_k(x; s2) from h_{k+1} = x h_k - k s2 h_{k-1}.
UnivariatePolynomial hermite(int k, const Rational& sigma2);
// The same polynomial as a signed sum over matchings of k points.
UnivariatePolynomial hermite_from_matchings(int k, const Rational& sigma2);

double hermite_value(int k, double sigma2, double x);

// Matchings with `pairs` pairs on blocks of the given sizes, no pair inside a block.
mpz_class cross_matching_count(std::vector<int> parts, int pairs);

// h_{k1} ... h_{kl} = sum_j coef_j h_j, as a map j -> coef_j.
std::map<int, Rational> hermite_product_expand(const std::vector<int>& ks, const Rational& sigma2);

}  // namespace fdc
