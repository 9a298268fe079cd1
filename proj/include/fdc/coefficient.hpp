#pragma once

#include <gmpxx.h>

#include <map>
#include <string>

namespace fdc {

using Rational = mpq_class;

std::string to_string(const Rational& q);

/**
 * Element of Q[n^{1/2}, n^{-1/2}]: a finite sum  sum_k c_k n^{-k/2}.
 * Terms are keyed by twice the exponent so half-integer powers stay exact.
 */
class Coefficient {
public:
    Coefficient() = default;
    Coefficient(long v);
    Coefficient(const Rational& v);

    // c * n^{-twice_k/2}
    static Coefficient power(int twice_k, const Rational& c = 1);

    const std::map<int, Rational>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    Rational constant_term() const;

    // Smallest exponent present; this is the Theta-order of the coefficient.
    int leading_twice_k() const;
    const Rational& leading_value() const;

    double evaluate(double n) const;

    Coefficient& operator+=(const Coefficient& o);
    Coefficient& operator-=(const Coefficient& o);
    Coefficient& operator*=(const Coefficient& o);
    friend Coefficient operator+(Coefficient a, const Coefficient& b) { return a += b; }
    friend Coefficient operator-(Coefficient a, const Coefficient& b) { return a -= b; }
    friend Coefficient operator*(Coefficient a, const Coefficient& b) { return a *= b; }
    Coefficient operator-() const;
    bool operator==(const Coefficient& o) const { return terms_ == o.terms_; }
    bool operator!=(const Coefficient& o) const { return !(*this == o); }

    std::string str() const;

private:
    void add_term(int twice_k, const Rational& c);
    std::map<int, Rational> terms_;
};

}  // namespace fdc
