#pragma once

#include "fdc/expression.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fdc {

/** a + b sqrt(s) with rational a, b and a fixed positive integer s. */
class Surd {
public:
    Surd() = default;
    Surd(const Rational& a, const Rational& b, long s);
    static Surd rational(const Rational& a, long s) { return Surd(a, 0, s); }

    const Rational& a() const { return a_; }
    const Rational& b() const { return b_; }
    long s() const { return s_; }
    bool is_zero() const { return a_ == 0 && b_ == 0; }
    double value() const;

    Surd& operator+=(const Surd& o);
    Surd& operator-=(const Surd& o);
    Surd& operator*=(const Surd& o);
    Surd& operator*=(const Rational& c);
    friend Surd operator+(Surd x, const Surd& y) { return x += y; }
    friend Surd operator-(Surd x, const Surd& y) { return x -= y; }
    friend Surd operator*(Surd x, const Surd& y) { return x *= y; }
    friend Surd operator*(Surd x, const Rational& c) { return x *= c; }
    bool operator==(const Surd& o) const { return a_ == o.a_ && b_ == o.b_; }
    bool operator!=(const Surd& o) const { return !(*this == o); }
    std::string str() const;

private:
    void normalize();
    Rational a_ = 0, b_ = 0;
    long s_ = 1;
};

using SignMatrix = std::vector<std::int8_t>;  // row-major n x n, zero diagonal

/**
 * All zero-diagonal sign patterns of an n x n symmetric matrix with entries
 * +-1/sqrt(n) (or +-1/sqrt(n-1) for the variant), each with equal weight.
 */
class ExhaustiveRademacher {
public:
    static constexpr int kMaxDimension = 5;
    explicit ExhaustiveRademacher(int n, bool variant = false);

    int n() const { return n_; }
    long scale() const { return s_; }  // entries are +-1/sqrt(scale)
    std::uint64_t patterns() const { return std::uint64_t(1) << (n_ * (n_ - 1) / 2); }
    SignMatrix pattern(std::uint64_t index) const;

    Surd zero() const { return Surd(0, 0, s_); }
    Surd one() const { return Surd(1, 0, s_); }
    Surd coefficient(const Coefficient& c) const;
    // Common value of |prod of entries| over injective labelings, times the label factors.
    Surd magnitude(const CanonicalDiagram& d) const;
    // Signed labeling counts per root coordinate (one entry for scalar diagrams).
    std::vector<long> sign_sums(const CanonicalDiagram& d, const SignMatrix& S) const;

    std::vector<Surd> values(const DiagramExpression& e, const SignMatrix& S) const;
    std::vector<Surd> matvec(const SignMatrix& S, const std::vector<Surd>& x) const;

    Surd expectation(const std::function<Surd(const SignMatrix&)>& f) const;

private:
    int n_;
    long s_;
};

// E[prod_k e_k at coordinate `coordinate`] under the exhaustive ensemble.
Surd exhaustive_rademacher_expectation(const std::vector<DiagramExpression>& factors, int n, int coordinate = 0,
                                       bool variant = false);

}  // namespace fdc
