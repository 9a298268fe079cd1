#pragma once

#include "fdc/diagram.hpp"

#include <map>
#include <string>

namespace fdc {

enum class Kind { vector, scalar };
// Which character a diagram stands for: injective Z or repeated-label Z-tilde.
enum class Basis { injective, repeated_label };

struct DiagramTerm {
    Coefficient coefficient;
    DiagramRef diagram;
};

/** Finite linear combination of canonical diagrams of one kind. */
class DiagramExpression {
public:
    explicit DiagramExpression(Kind kind = Kind::vector, Basis basis = Basis::injective)
        : kind_(kind), basis_(basis) {}

    static DiagramExpression of(const Diagram& d, const Coefficient& c = 1);
    static DiagramExpression of(const DiagramRef& d, const Coefficient& c = 1);

    Kind kind() const { return kind_; }
    Basis basis() const { return basis_; }
    const std::map<std::string, DiagramTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    size_t size() const { return terms_.size(); }

    void add(const DiagramRef& d, const Coefficient& c);
    void add(const Diagram& d, const Coefficient& c) { add(canonicalize(d), c); }
    Coefficient coefficient_of(const Diagram& d) const;
    Coefficient coefficient_of(const DiagramRef& d) const;

    DiagramExpression& operator+=(const DiagramExpression& o);
    DiagramExpression& operator-=(const DiagramExpression& o);
    DiagramExpression& operator*=(const Coefficient& c);
    friend DiagramExpression operator+(DiagramExpression a, const DiagramExpression& b) { return a += b; }
    friend DiagramExpression operator-(DiagramExpression a, const DiagramExpression& b) { return a -= b; }
    friend DiagramExpression operator*(const Coefficient& c, DiagramExpression a) { return a *= c; }
    bool operator==(const DiagramExpression& o) const;

    std::string str() const;

private:
    Kind kind_;
    Basis basis_;
    std::map<std::string, DiagramTerm> terms_;
};

}  // namespace fdc
