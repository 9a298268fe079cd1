#include "fdc/polynomial.hpp"

#include "fdc/errors.hpp"

#include <algorithm>
#include <sstream>

namespace fdc {

HistoryPolynomial HistoryPolynomial::constant(const Rational& c, int variables) {
    HistoryPolynomial p(variables);
    p.add_term(std::vector<int>(variables, 0), c);
    return p;
}

HistoryPolynomial HistoryPolynomial::variable(int s, int variables) {
    if (s < 0 || s >= variables) throw PreconditionError("variable index out of range");
    HistoryPolynomial p(variables);
    std::vector<int> e(variables, 0);
    e[s] = 1;
    p.add_term(e, 1);
    return p;
}

void HistoryPolynomial::add_term(std::vector<int> exps, const Rational& c) {
    if (int(exps.size()) != vars_) throw PreconditionError("exponent vector has the wrong length");
    for (int e : exps)
        if (e < 0) throw PreconditionError("negative exponent");
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(std::move(exps), c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

int HistoryPolynomial::degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) {
        int s = 0;
        for (int x : e) s += x;
        d = std::max(d, s);
    }
    return d;
}

HistoryPolynomial HistoryPolynomial::derivative(int s) const {
    HistoryPolynomial r(vars_);
    for (const auto& [e, c] : terms_) {
        if (e[s] == 0) continue;
        auto f = e;
        f[s]--;
        r.add_term(f, c * e[s]);
    }
    return r;
}

HistoryPolynomial HistoryPolynomial::widened(int variables) const {
    if (variables < vars_) {
        if (highest_variable() >= variables) throw PreconditionError("cannot drop a used variable");
    }
    HistoryPolynomial r(variables);
    for (const auto& [e, c] : terms_) {
        std::vector<int> f(variables, 0);
        for (int i = 0; i < std::min(vars_, variables); ++i) f[i] = e[i];
        r.add_term(f, c);
    }
    return r;
}

int HistoryPolynomial::highest_variable() const {
    int h = -1;
    for (const auto& [e, c] : terms_)
        for (int i = 0; i < int(e.size()); ++i)
            if (e[i] > 0) h = std::max(h, i);
    return h;
}

double HistoryPolynomial::evaluate(const double* w) const {
    double s = 0.0;
    for (const auto& [e, c] : terms_) {
        double m = c.get_d();
        for (int i = 0; i < vars_; ++i)
            for (int k = 0; k < e[i]; ++k) m *= w[i];
        s += m;
    }
    return s;
}

HistoryPolynomial& HistoryPolynomial::operator+=(const HistoryPolynomial& o) {
    if (o.vars_ != vars_) throw PreconditionError("adding polynomials over different histories");
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
}

HistoryPolynomial& HistoryPolynomial::operator*=(const Rational& c) {
    if (c == 0) terms_.clear();
    for (auto& [e, v] : terms_) v *= c;
    return *this;
}

HistoryPolynomial operator*(HistoryPolynomial a, const HistoryPolynomial& b) {
    if (a.vars_ != b.vars_) throw PreconditionError("multiplying polynomials over different histories");
    HistoryPolynomial r(a.vars_);
    for (const auto& [ea, ca] : a.terms_)
        for (const auto& [eb, cb] : b.terms_) {
            auto e = ea;
            for (size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
            r.add_term(e, ca * cb);
        }
    return r;
}

std::string HistoryPolynomial::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : terms_) {
        os << (first ? "" : " + ") << c.get_str();
        first = false;
        for (size_t i = 0; i < e.size(); ++i)
            if (e[i]) os << "*w" << i << (e[i] > 1 ? "^" + std::to_string(e[i]) : "");
    }
    return os.str();
}

Rational UnivariatePolynomial::operator()(const Rational& x) const {
    Rational s = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
    return s;
}

double UnivariatePolynomial::operator()(double x) const {
    double s = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + it->get_d();
    return s;
}

}  // namespace fdc
