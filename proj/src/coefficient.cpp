#include "fdc/coefficient.hpp"

#include "fdc/errors.hpp"

#include <cmath>
#include <sstream>

namespace fdc {

std::string to_string(const Rational& q) { return q.get_str(); }

Coefficient::Coefficient(long v) { add_term(0, Rational(v)); }

Coefficient::Coefficient(const Rational& v) { add_term(0, v); }

Coefficient Coefficient::power(int twice_k, const Rational& c) {
    Coefficient r;
    r.add_term(twice_k, c);
    return r;
}

void Coefficient::add_term(int twice_k, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(twice_k, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

bool Coefficient::is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == 0);
}

Rational Coefficient::constant_term() const {
    auto it = terms_.find(0);
    return it == terms_.end() ? Rational(0) : it->second;
}

int Coefficient::leading_twice_k() const {
    if (terms_.empty()) throw PreconditionError("leading exponent of a zero coefficient");
    return terms_.begin()->first;
}

const Rational& Coefficient::leading_value() const {
    if (terms_.empty()) throw PreconditionError("leading value of a zero coefficient");
    return terms_.begin()->second;
}

double Coefficient::evaluate(double n) const {
    double s = 0.0;
    for (const auto& [tk, c] : terms_) s += c.get_d() * std::pow(n, -0.5 * tk);
    return s;
}

Coefficient& Coefficient::operator+=(const Coefficient& o) {
    for (const auto& [tk, c] : o.terms_) add_term(tk, c);
    return *this;
}

Coefficient& Coefficient::operator-=(const Coefficient& o) {
    for (const auto& [tk, c] : o.terms_) add_term(tk, -c);
    return *this;
}

Coefficient& Coefficient::operator*=(const Coefficient& o) {
    Coefficient r;
    for (const auto& [a, ca] : terms_)
        for (const auto& [b, cb] : o.terms_) r.add_term(a + b, ca * cb);
    *this = std::move(r);
    return *this;
}

Coefficient Coefficient::operator-() const {
    Coefficient r;
    for (const auto& [tk, c] : terms_) r.terms_.emplace(tk, -c);
    return r;
}

std::string Coefficient::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [tk, c] : terms_) {
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0) os << "-";
        first = false;
        Rational a = abs(c);
        if (tk == 0) {
            os << a.get_str();
            continue;
        }
        if (a != 1) os << a.get_str() << "*";
        os << "n^" << (tk % 2 == 0 ? std::to_string(-tk / 2) : "(" + std::to_string(-tk) + "/2)");
    }
    return os.str();
}

}  // namespace fdc
