#pragma once

#include "fdc/coefficient.hpp"

#include <map>
#include <string>
#include <vector>

namespace fdc {

/**
 * Polynomial in the iterate history w_0..w_{k-1}. Variable s is the
 * iterate produced at time s, so exponent vectors read [e_0, ..., e_{k-1}].
 */
class HistoryPolynomial {
public:
    HistoryPolynomial() = default;
    explicit HistoryPolynomial(int variables) : vars_(variables) {}

    static HistoryPolynomial constant(const Rational& c, int variables);
    static HistoryPolynomial variable(int s, int variables);

    int variables() const { return vars_; }
    const std::map<std::vector<int>, Rational>& terms() const { return terms_; }
    int degree() const;
    bool is_zero() const { return terms_.empty(); }

    void add_term(std::vector<int> exps, const Rational& c);
    HistoryPolynomial derivative(int s) const;
    // Same polynomial over more variables (new ones unused).
    HistoryPolynomial widened(int variables) const;
    // Highest variable index with a nonzero exponent, or -1.
    int highest_variable() const;

    double evaluate(const double* w) const;

    HistoryPolynomial& operator+=(const HistoryPolynomial& o);
    HistoryPolynomial& operator*=(const Rational& c);
    friend HistoryPolynomial operator+(HistoryPolynomial a, const HistoryPolynomial& b) { return a += b; }
    friend HistoryPolynomial operator*(HistoryPolynomial a, const HistoryPolynomial& b);
    bool operator==(const HistoryPolynomial& o) const { return vars_ == o.vars_ && terms_ == o.terms_; }

    std::string str() const;

private:
    int vars_ = 0;
    std::map<std::vector<int>, Rational> terms_;
};

/** Dense univariate polynomial with rational coefficients, lowest degree first. */
struct UnivariatePolynomial {
    std::vector<Rational> c;
    int degree() const { return int(c.size()) - 1; }
    Rational operator()(const Rational& x) const;
    double operator()(double x) const;
    bool operator==(const UnivariatePolynomial& o) const { return c == o.c; }
};

}  // namespace fdc
