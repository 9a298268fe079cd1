#include "fdc/tree_state.hpp"

#include "fdc/errors.hpp"
#include "fdc/hermite.hpp"

#include <algorithm>
#include <functional>
#include <mutex>
#include <sstream>

namespace fdc {

namespace {

DiagramRef require_tree(const DiagramRef& d) {
    if (!d->is_tree()) throw PreconditionError("tree state support must be rooted trees: " + d->key());
    return d;
}

DiagramRef singleton_ref() {
    static DiagramRef s = canonicalize(shapes::singleton());
    return s;
}

Rational aut_q(const CanonicalDiagram& d) { return Rational(mpz_class(std::to_string(d.aut()))); }

std::mutex pm_mu;
std::map<std::string, DiagramRef> plus_memo;

DiagramRef tree_plus(const DiagramRef& t) {
    {
        std::lock_guard lock(pm_mu);
        auto it = plus_memo.find(t->key());
        if (it != plus_memo.end()) return it->second;
    }
    Diagram d = t->diagram();
    int nr = d.vertex_count++;
    d.add_edge(nr, *d.root);
    d.root = nr;
    DiagramRef r = canonicalize(d);
    std::lock_guard lock(pm_mu);
    plus_memo.emplace(t->key(), r);
    return r;
}

// For a tree whose root has degree one: re-root at the root's child.
DiagramRef tree_minus(const DiagramRef& t) {
    const Diagram& d = t->diagram();
    auto nb = t->cells().neighbors(0);
    int child = nb[0];
    Diagram r;
    r.vertex_count = d.vertex_count - 1;
    auto idx = [](int v) { return v - 1; };
    r.root = idx(child);
    for (const auto& e : d.edges)
        if (e.u != 0 && e.v != 0) r.add_edge(idx(e.u), idx(e.v), e.multiplicity, e.label);
    return canonicalize(r);
}

std::mutex product_mu;
std::map<std::string, TreeState> product_memo;

}  // namespace

TreeState TreeState::constant(const Rational& c) { return of(singleton_ref(), c); }

TreeState TreeState::of(const DiagramRef& tree, const Rational& c) {
    TreeState s;
    s.add(tree, c);
    return s;
}

TreeState TreeState::of(const Diagram& tree, const Rational& c) { return of(canonicalize(tree), c); }

void TreeState::add(const DiagramRef& tree, const Rational& c) {
    require_tree(tree);
    if (c == 0) return;
    auto it = terms_.find(tree->key());
    if (it == terms_.end()) {
        terms_.emplace(tree->key(), Term{tree, c});
        return;
    }
    it->second.coef += c;
    if (it->second.coef == 0) terms_.erase(it);
}

Rational TreeState::coefficient_of(const DiagramRef& tree) const {
    auto it = terms_.find(tree->key());
    return it == terms_.end() ? Rational(0) : it->second.coef;
}

Rational TreeState::coefficient_of(const Diagram& tree) const { return coefficient_of(canonicalize(tree)); }

TreeState& TreeState::operator+=(const TreeState& o) {
    for (const auto& [k, t] : o.terms_) add(t.tree, t.coef);
    return *this;
}

TreeState& TreeState::operator-=(const TreeState& o) {
    for (const auto& [k, t] : o.terms_) add(t.tree, -t.coef);
    return *this;
}

TreeState& TreeState::operator*=(const Rational& c) {
    if (c == 0) terms_.clear();
    for (auto& [k, t] : terms_) t.coef *= c;
    return *this;
}

bool TreeState::operator==(const TreeState& o) const {
    if (terms_.size() != o.terms_.size()) return false;
    for (const auto& [k, t] : terms_) {
        auto it = o.terms_.find(k);
        if (it == o.terms_.end() || it->second.coef != t.coef) return false;
    }
    return true;
}

bool TreeState::gaussian() const {
    for (const auto& [k, t] : terms_)
        if (t.tree->cells().neighbors(0).size() != 1) return false;
    return true;
}

int TreeState::max_depth() const {
    int d = 0;
    for (const auto& [k, t] : terms_) d = std::max(d, t.tree->tree()->depth);
    return d;
}

int TreeState::min_depth() const {
    int d = -1;
    for (const auto& [k, t] : terms_) d = d < 0 ? t.tree->tree()->depth : std::min(d, t.tree->tree()->depth);
    return d < 0 ? 0 : d;
}

DiagramExpression TreeState::to_expression() const {
    DiagramExpression e(Kind::vector);
    for (const auto& [k, t] : terms_) e.add(t.tree, Coefficient(t.coef));
    return e;
}

std::string TreeState::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, t] : terms_) {
        os << (first ? "" : " + ") << t.coef.get_str() << "*" << k;
        first = false;
    }
    return os.str();
}

TreeState plus(const TreeState& x) {
    TreeState r;
    for (const auto& [k, t] : x.terms()) r.add(tree_plus(t.tree), t.coef);
    return r;
}

TreeState minus(const TreeState& x) {
    TreeState r;
    for (const auto& [k, t] : x.terms())
        if (t.tree->cells().neighbors(0).size() == 1) r.add(tree_minus(t.tree), t.coef);
    return r;
}

TreeState tree_product(const std::vector<DiagramRef>& taus) {
    std::string key;
    for (const auto& t : taus) key += require_tree(t)->key() + "|";
    {
        std::lock_guard lock(product_mu);
        auto it = product_memo.find(key);
        if (it != product_memo.end()) return it->second;
    }
    // sigma key -> (sigma, per-factor counts)
    std::map<std::string, std::pair<DiagramRef, std::vector<int>>> groups;
    for (size_t j = 0; j < taus.size(); ++j)
        for (const auto& [sigma, count] : taus[j]->tree()->branches) {
            auto& g = groups[sigma->key()];
            g.first = sigma;
            g.second.resize(taus.size(), 0);
            g.second[j] += count;
        }
    std::vector<std::pair<DiagramRef, std::vector<int>>> gs;
    for (auto& [k, g] : groups) gs.push_back(g);

    TreeState out;
    std::vector<std::pair<DiagramRef, int>> branches;
    std::function<void(size_t, Rational)> rec = [&](size_t i, Rational weight) {
        if (i == gs.size()) {
            out.add(canonicalize(join_branches(branches)), weight);
            return;
        }
        const auto& [sigma, counts] = gs[i];
        int total = 0;
        for (int c : counts) total += c;
        Rational a = aut_q(*sigma), apow = 1;
        for (int m = 0; 2 * m <= total; ++m) {
            mpz_class ways = cross_matching_count(counts, m);
            if (ways != 0) {
                if (total - 2 * m > 0) branches.emplace_back(sigma, total - 2 * m);
                rec(i + 1, weight * Rational(ways) * apow);
                if (total - 2 * m > 0) branches.pop_back();
            }
            apow *= a;
        }
    };
    rec(0, 1);
    std::lock_guard lock(product_mu);
    product_memo.emplace(key, out);
    return out;
}

TreeState operator*(const TreeState& a, const TreeState& b) {
    TreeState r;
    for (const auto& [ka, ta] : a.terms())
        for (const auto& [kb, tb] : b.terms()) {
            TreeState p = tree_product({ta.tree, tb.tree});
            r += (ta.coef * tb.coef) * p;
        }
    return r;
}

TreeState power(const TreeState& x, int k) {
    if (k < 0) throw PreconditionError("negative power");
    TreeState r = TreeState::constant(1);
    for (int i = 0; i < k; ++i) r = r * x;
    return r;
}

TreeState apply_polynomial(const HistoryPolynomial& f, const std::vector<TreeState>& history) {
    if (f.highest_variable() >= int(history.size()))
        throw PreconditionError("polynomial uses more variables than the history provides");
    TreeState out;
    std::map<std::pair<int, int>, TreeState> powers;
    for (const auto& [e, c] : f.terms()) {
        TreeState m = TreeState::constant(1);
        for (int s = 0; s < int(e.size()); ++s) {
            if (e[s] == 0) continue;
            auto it = powers.find({s, e[s]});
            if (it == powers.end()) it = powers.emplace(std::make_pair(s, e[s]), power(history[s], e[s])).first;
            m = m * it->second;
        }
        out += c * m;
    }
    return out;
}

Rational expectation(const TreeState& x) { return x.coefficient_of(singleton_ref()); }

Rational inner_product(const TreeState& x, const TreeState& y) {
    Rational s = 0;
    for (const auto& [k, t] : x.terms()) {
        auto it = y.terms().find(k);
        if (it != y.terms().end()) s += t.coef * it->second.coef * aut_q(*t.tree);
    }
    return s;
}

std::vector<DiagramRef> gaussian_atoms(const std::vector<TreeState>& xs) {
    std::map<std::string, DiagramRef> atoms;
    for (const auto& x : xs)
        for (const auto& [k, t] : x.terms())
            for (const auto& [sigma, c] : t.tree->tree()->branches) atoms.emplace(sigma->key(), sigma);
    std::vector<DiagramRef> r;
    for (auto& [k, s] : atoms) r.push_back(s);
    return r;
}

}  // namespace fdc
