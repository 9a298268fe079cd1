#pragma once

#include "fdc/expression.hpp"
#include "fdc/polynomial.hpp"

#include <map>
#include <string>
#include <vector>

namespace fdc {

/**
 * Linear combination of rooted trees with rational coefficients. Read either
 * as a tree approximation sum c_tau Z_tau or as a state in the Gaussian space.
 */
class TreeState {
public:
    TreeState() = default;
    static TreeState constant(const Rational& c);
    static TreeState of(const DiagramRef& tree, const Rational& c = 1);
    static TreeState of(const Diagram& tree, const Rational& c = 1);

    struct Term {
        DiagramRef tree;
        Rational coef;
    };
    const std::map<std::string, Term>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    size_t size() const { return terms_.size(); }

    void add(const DiagramRef& tree, const Rational& c);
    Rational coefficient_of(const DiagramRef& tree) const;
    Rational coefficient_of(const Diagram& tree) const;

    TreeState& operator+=(const TreeState& o);
    TreeState& operator-=(const TreeState& o);
    TreeState& operator*=(const Rational& c);
    friend TreeState operator+(TreeState a, const TreeState& b) { return a += b; }
    friend TreeState operator-(TreeState a, const TreeState& b) { return a -= b; }
    friend TreeState operator*(const Rational& c, TreeState a) { return a *= c; }
    friend TreeState operator*(const TreeState& a, const TreeState& b);
    bool operator==(const TreeState& o) const;

    // Every support tree has root degree one.
    bool gaussian() const;
    int max_depth() const;
    int min_depth() const;

    DiagramExpression to_expression() const;
    std::string str() const;

private:
    std::map<std::string, Term> terms_;
};

TreeState plus(const TreeState& x);
TreeState minus(const TreeState& x);

// Sum over partial matchings of isomorphic branches taken from different factors.
TreeState tree_product(const std::vector<DiagramRef>& taus);

TreeState power(const TreeState& x, int k);
TreeState apply_polynomial(const HistoryPolynomial& f, const std::vector<TreeState>& history);

Rational expectation(const TreeState& x);
Rational inner_product(const TreeState& x, const TreeState& y);

// Root-degree-one trees appearing as branches anywhere in the support.
std::vector<DiagramRef> gaussian_atoms(const std::vector<TreeState>& xs);

}  // namespace fdc
