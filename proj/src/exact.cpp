#include "fdc/exact.hpp"

#include "fdc/errors.hpp"

#include <cmath>
#include <sstream>

namespace fdc {

namespace {

long integer_sqrt(long s) {
    long r = long(std::sqrt(double(s)));
    while (r * r > s) --r;
    while ((r + 1) * (r + 1) <= s) ++r;
    return r;
}

}  // namespace

Surd::Surd(const Rational& a, const Rational& b, long s) : a_(a), b_(b), s_(s) {
    if (s <= 0) throw PreconditionError("surd radicand must be positive");
    normalize();
}

void Surd::normalize() {
    long r = integer_sqrt(s_);
    if (r * r == s_ && b_ != 0) {
        a_ += b_ * r;
        b_ = 0;
    }
}

double Surd::value() const { return a_.get_d() + b_.get_d() * std::sqrt(double(s_)); }

Surd& Surd::operator+=(const Surd& o) {
    if (o.s_ != s_) throw PreconditionError("mixed radicands");
    a_ += o.a_;
    b_ += o.b_;
    return *this;
}

Surd& Surd::operator-=(const Surd& o) {
    if (o.s_ != s_) throw PreconditionError("mixed radicands");
    a_ -= o.a_;
    b_ -= o.b_;
    return *this;
}

Surd& Surd::operator*=(const Surd& o) {
    if (o.s_ != s_) throw PreconditionError("mixed radicands");
    Rational a = a_ * o.a_ + b_ * o.b_ * s_;
    Rational b = a_ * o.b_ + b_ * o.a_;
    a_ = a;
    b_ = b;
    return *this;
}

Surd& Surd::operator*=(const Rational& c) {
    a_ *= c;
    b_ *= c;
    return *this;
}

std::string Surd::str() const {
    std::ostringstream os;
    os << to_string(a_);
    if (b_ != 0) os << (b_ > 0 ? " + " : " - ") << to_string(abs(b_)) << "*sqrt(" << s_ << ")";
    return os.str();
}

ExhaustiveRademacher::ExhaustiveRademacher(int n, bool variant) : n_(n), s_(variant ? n - 1 : n) {
    if (n < 1 || n > kMaxDimension)
        throw PreconditionError("exhaustive ensemble needs 1 <= n <= " + std::to_string(kMaxDimension));
    if (s_ < 1) throw PreconditionError("variant scaling needs n >= 2");
}

SignMatrix ExhaustiveRademacher::pattern(std::uint64_t index) const {
    SignMatrix S(size_t(n_) * n_, 0);
    int bit = 0;
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j, ++bit) {
            std::int8_t v = ((index >> bit) & 1) ? -1 : 1;
            S[i * n_ + j] = S[j * n_ + i] = v;
        }
    return S;
}

Surd ExhaustiveRademacher::coefficient(const Coefficient& c) const {
    Surd r = zero();
    for (const auto& [tk, v] : c.terms()) {
        // n^{-tk/2}
        int k = tk >= 0 ? tk / 2 : -((-tk + 1) / 2);
        bool half = (tk % 2) != 0;
        Rational p = 1;
        for (int i = 0; i < std::abs(k); ++i) p *= n_;
        if (k > 0) p = 1 / p;
        if (!half) {
            r += Surd(v * p, 0, s_);
            continue;
        }
        // n^{-tk/2} = n^{-k} * n^{-1/2} when tk = 2k + 1
        long rn = integer_sqrt(n_);
        Rational inv_sqrt_n_factor = p / n_;  // n^{-k-1} * sqrt(n)
        if (rn * rn == n_)
            r += Surd(v * inv_sqrt_n_factor * rn, 0, s_);
        else if (s_ == n_)
            r += Surd(0, v * inv_sqrt_n_factor, s_);
        else
            throw PreconditionError("half-integer powers of n need the 1/sqrt(n) ensemble");
    }
    return r;
}

Surd ExhaustiveRademacher::magnitude(const CanonicalDiagram& d) const {
    const CellMatrix& g = d.cells();
    Surd m = one();
    int plain = 0;
    Rational two_factor = 1;
    for (int u = 0; u < g.size(); ++u)
        for (int v = u; v < g.size(); ++v) {
            const Cell& c = g.at(u, v);
            if (c.empty()) continue;
            if (u == v && c.p > 0) return zero();  // zero diagonal
            Rational w = u == v ? Rational(-1, n_) : Rational(1, s_) - Rational(1, n_);
            w.canonicalize();
            for (int i = 0; i < c.q; ++i) two_factor *= w;
            plain += c.p;
        }
    // s^{-plain/2}
    Rational p = 1;
    for (int i = 0; i < plain / 2; ++i) p /= s_;
    m = plain % 2 ? Surd(0, p / s_, s_) : Surd(p, 0, s_);
    return m * two_factor;
}

std::vector<long> ExhaustiveRademacher::sign_sums(const CanonicalDiagram& d, const SignMatrix& S) const {
    const CellMatrix& g = d.cells();
    const int V = d.vertex_count();
    std::vector<int> phi(V, -1);
    std::vector<char> used(n_, 0);
    long acc = 0;
    // Only the parity of plain multiplicities matters for signs.
    std::function<void(int, long)> rec = [&](int v, long sign) {
        if (v == V) {
            acc += sign;
            return;
        }
        for (int x = 0; x < n_; ++x) {
            if (used[x]) continue;
            long s = sign;
            for (int u = 0; u < v; ++u) {
                int p = g.at(u, v).p;
                if (p % 2) s *= S[phi[u] * n_ + x];
            }
            phi[v] = x;
            used[x] = 1;
            rec(v + 1, s);
            used[x] = 0;
        }
    };
    if (!d.rooted()) {
        if (V <= n_) rec(0, 1);
        return {acc};
    }
    std::vector<long> out(n_, 0);
    if (V > n_) return out;
    for (int i = 0; i < n_; ++i) {
        acc = 0;
        phi[0] = i;
        used[i] = 1;
        rec(1, 1);
        used[i] = 0;
        out[i] = acc;
    }
    return out;
}

std::vector<Surd> ExhaustiveRademacher::values(const DiagramExpression& e, const SignMatrix& S) const {
    const bool scalar = e.kind() == Kind::scalar;
    std::vector<Surd> out(scalar ? 1 : n_, zero());
    for (const auto& [k, t] : e.terms()) {
        Surd m = magnitude(*t.diagram) * coefficient(t.coefficient);
        if (m.is_zero()) continue;
        auto ss = sign_sums(*t.diagram, S);
        for (size_t i = 0; i < out.size(); ++i)
            if (ss[i] != 0) out[i] += m * Rational(ss[i]);
    }
    return out;
}

std::vector<Surd> ExhaustiveRademacher::matvec(const SignMatrix& S, const std::vector<Surd>& x) const {
    // entries are S_ij / sqrt(s) = S_ij sqrt(s) / s
    std::vector<Surd> out(n_, zero());
    for (int i = 0; i < n_; ++i) {
        Surd acc = zero();
        for (int j = 0; j < n_; ++j)
            if (S[i * n_ + j] > 0) acc += x[j];
            else if (S[i * n_ + j] < 0) acc -= x[j];
        out[i] = acc * Surd(0, Rational(1, s_), s_);
    }
    return out;
}

Surd ExhaustiveRademacher::expectation(const std::function<Surd(const SignMatrix&)>& f) const {
    Surd acc = zero();
    const std::uint64_t N = patterns();
    for (std::uint64_t idx = 0; idx < N; ++idx) acc += f(pattern(idx));
    return acc * Rational(mpz_class(1), mpz_class(N));
}

Surd exhaustive_rademacher_expectation(const std::vector<DiagramExpression>& factors, int n, int coordinate,
                                       bool variant) {
    ExhaustiveRademacher ens(n, variant);
    if (coordinate < 0 || coordinate >= n) throw PreconditionError("coordinate out of range");
    return ens.expectation([&](const SignMatrix& S) {
        Surd prod = ens.one();
        for (const auto& f : factors) {
            auto v = ens.values(f, S);
            prod *= f.kind() == Kind::scalar ? v[0] : v[coordinate];
            if (prod.is_zero()) break;
        }
        return prod;
    });
}

}  // namespace fdc
