#include "fdc/expression.hpp"

#include "fdc/errors.hpp"

#include <sstream>

namespace fdc {

DiagramExpression DiagramExpression::of(const Diagram& d, const Coefficient& c) {
    return of(canonicalize(d), c);
}

DiagramExpression DiagramExpression::of(const DiagramRef& d, const Coefficient& c) {
    DiagramExpression e(d->rooted() ? Kind::vector : Kind::scalar);
    e.add(d, c);
    return e;
}

void DiagramExpression::add(const DiagramRef& d, const Coefficient& c) {
    if (d->rooted() != (kind_ == Kind::vector))
        throw KindError("cannot mix vector and scalar diagrams in one expression");
    if (c.is_zero()) return;
    auto it = terms_.find(d->key());
    if (it == terms_.end()) {
        terms_.emplace(d->key(), DiagramTerm{c, d});
        return;
    }
    it->second.coefficient += c;
    if (it->second.coefficient.is_zero()) terms_.erase(it);
}

Coefficient DiagramExpression::coefficient_of(const Diagram& d) const {
    return coefficient_of(canonicalize(d));
}

Coefficient DiagramExpression::coefficient_of(const DiagramRef& d) const {
    auto it = terms_.find(d->key());
    return it == terms_.end() ? Coefficient() : it->second.coefficient;
}

DiagramExpression& DiagramExpression::operator+=(const DiagramExpression& o) {
    if (o.empty()) return *this;
    if (o.kind_ != kind_) throw KindError("cannot add vector and scalar expressions");
    if (o.basis_ != basis_) throw KindError("cannot add expressions in different bases");
    for (const auto& [k, t] : o.terms_) add(t.diagram, t.coefficient);
    return *this;
}

DiagramExpression& DiagramExpression::operator-=(const DiagramExpression& o) {
    if (o.empty()) return *this;
    if (o.kind_ != kind_) throw KindError("cannot subtract vector and scalar expressions");
    if (o.basis_ != basis_) throw KindError("cannot subtract expressions in different bases");
    for (const auto& [k, t] : o.terms_) add(t.diagram, -t.coefficient);
    return *this;
}

DiagramExpression& DiagramExpression::operator*=(const Coefficient& c) {
    if (c.is_zero()) {
        terms_.clear();
        return *this;
    }
    for (auto& [k, t] : terms_) t.coefficient *= c;
    return *this;
}

bool DiagramExpression::operator==(const DiagramExpression& o) const {
    if (terms_.size() != o.terms_.size()) return false;
    if (!terms_.empty() && (kind_ != o.kind_ || basis_ != o.basis_)) return false;
    for (const auto& [k, t] : terms_) {
        auto it = o.terms_.find(k);
        if (it == o.terms_.end() || it->second.coefficient != t.coefficient) return false;
    }
    return true;
}

std::string DiagramExpression::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, t] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << "(" << t.coefficient.str() << ")" << (basis_ == Basis::repeated_label ? "Z~" : "Z") << k;
    }
    return os.str();
}

}  // namespace fdc
