#include "fdc/algebra.hpp"

#include "fdc/errors.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <shared_mutex>

namespace fdc {

Diagram contract(const Diagram& d, const std::vector<int>& block, int block_count) {
    Diagram r;
    r.vertex_count = block_count;
    if (d.root) r.root = block[*d.root];
    for (const auto& e : d.edges) r.add_edge(block[e.u], block[e.v], e.multiplicity, e.label);
    return r;
}

namespace {

void partition_rec(int i, int n, std::vector<int>& blk, int used,
                   const std::function<void(const std::vector<int>&, int)>& f) {
    if (i == n) {
        f(blk, used);
        return;
    }
    for (int b = 0; b <= used; ++b) {
        blk[i] = b;
        partition_rec(i + 1, n, blk, std::max(used, b + 1), f);
    }
}

void constrained_rec(size_t i, const std::vector<std::uint64_t>& mask, std::vector<int>& blk,
                     std::vector<std::uint64_t>& members,
                     const std::function<void(const std::vector<int>&, int)>& f) {
    if (i == mask.size()) {
        f(blk, int(members.size()));
        return;
    }
    for (size_t b = 0; b < members.size(); ++b) {
        if (members[b] & mask[i]) continue;
        blk[i] = int(b);
        members[b] |= mask[i];
        constrained_rec(i + 1, mask, blk, members, f);
        members[b] &= ~mask[i];
    }
    blk[i] = int(members.size());
    members.push_back(mask[i]);
    constrained_rec(i + 1, mask, blk, members, f);
    members.pop_back();
}

std::mutex product_cache_mu;
std::map<std::string, DiagramExpression> product_cache;

std::shared_mutex moebius_mu;
std::map<std::string, DiagramExpression> moebius_cache;

}  // namespace

void for_each_partition(int n, const std::function<void(const std::vector<int>&, int)>& f) {
    std::vector<int> blk(n, 0);
    partition_rec(0, n, blk, 0, f);
}

void for_each_constrained_partition(const std::vector<std::uint64_t>& mask,
                                    const std::function<void(const std::vector<int>&, int)>& f) {
    std::vector<int> blk(mask.size(), 0);
    std::vector<std::uint64_t> members;
    constrained_rec(0, mask, blk, members, f);
}

DiagramExpression multiply_by_A(const DiagramExpression& e) {
    if (e.kind() != Kind::vector) throw KindError("multiply_by_A needs a vector expression");
    DiagramExpression out(Kind::vector);
    for (const auto& [k, t] : e.terms()) {
        const Diagram& a = t.diagram->diagram();
        int r = *a.root;
        Diagram plus = a;
        int nr = a.vertex_count;
        plus.vertex_count++;
        plus.root = nr;
        plus.add_edge(nr, r);
        out.add(plus, t.coefficient);
        for (int v = 0; v < a.vertex_count; ++v) {
            std::vector<int> blk(plus.vertex_count);
            for (int u = 0; u < a.vertex_count; ++u) blk[u] = u;
            blk[nr] = v;
            out.add(contract(plus, blk, a.vertex_count), t.coefficient);
        }
    }
    return out;
}

DiagramExpression diagram_product(const std::vector<DiagramRef>& factors, int vertex_budget) {
    bool vector = false;
    int nonroot = 0;
    std::string cache_key = std::to_string(vertex_budget) + "|";
    for (const auto& f : factors) {
        vector = vector || f->rooted();
        nonroot += f->vertex_count() - (f->rooted() ? 1 : 0);
        cache_key += f->key() + "|";
    }
    if (nonroot > vertex_budget)
        throw BudgetError("product of " + std::to_string(factors.size()) + " diagrams has " +
                          std::to_string(nonroot) + " non-root vertices, budget is " +
                          std::to_string(vertex_budget) + ": " + cache_key);
    {
        std::lock_guard lock(product_cache_mu);
        auto it = product_cache.find(cache_key);
        if (it != product_cache.end()) return it->second;
    }
    if (factors.size() > 60) throw BudgetError("too many factors in one product");
    // Union: shared root is vertex 0 when any factor is rooted. Scalar factors
    // may land on the root label; vector factors own the root already.
    Diagram u;
    std::vector<std::uint64_t> mask;
    if (vector) {
        u.vertex_count = 1;
        u.root = 0;
        std::uint64_t owners = 0;
        for (size_t fi = 0; fi < factors.size(); ++fi)
            if (factors[fi]->rooted()) owners |= std::uint64_t(1) << fi;
        mask.push_back(owners);
    }
    for (size_t fi = 0; fi < factors.size(); ++fi) {
        const Diagram& d = factors[fi]->diagram();
        std::vector<int> map(d.vertex_count);
        for (int v = 0; v < d.vertex_count; ++v) {
            if (d.root && *d.root == v) {
                map[v] = 0;
                continue;
            }
            map[v] = u.vertex_count++;
            mask.push_back(std::uint64_t(1) << fi);
        }
        for (const auto& e : d.edges) u.add_edge(map[e.u], map[e.v], e.multiplicity, e.label);
    }
    DiagramExpression out(vector ? Kind::vector : Kind::scalar);
    for_each_constrained_partition(mask, [&](const std::vector<int>& blk, int count) {
        out.add(contract(u, blk, count), Coefficient(1));
    });
    std::lock_guard lock(product_cache_mu);
    product_cache.emplace(cache_key, out);
    return out;
}

namespace {

DiagramExpression product_impl(const std::vector<DiagramExpression>& es, int budget, bool allow_scalar) {
    if (es.empty()) throw PreconditionError("empty product");
    bool vector = false;
    for (const auto& e : es) {
        if (e.basis() != Basis::injective) throw KindError("products need injective-basis expressions");
        if (e.kind() == Kind::vector) vector = true;
        else if (!allow_scalar) throw KindError("pointwise_product needs vector expressions");
    }
    DiagramExpression out(vector ? Kind::vector : Kind::scalar);
    std::vector<const DiagramTerm*> pick(es.size());
    std::function<void(size_t)> rec = [&](size_t i) {
        if (i == es.size()) {
            Coefficient c(1);
            std::vector<DiagramRef> fs;
            for (auto* t : pick) {
                c *= t->coefficient;
                fs.push_back(t->diagram);
            }
            DiagramExpression p = diagram_product(fs, budget);
            out += c * p;
            return;
        }
        for (const auto& [k, t] : es[i].terms()) {
            pick[i] = &t;
            rec(i + 1);
        }
    };
    rec(0);
    return out;
}

}  // namespace

DiagramExpression pointwise_product(const std::vector<DiagramExpression>& es, int vertex_budget) {
    return product_impl(es, vertex_budget, false);
}

DiagramExpression scalar_product(const std::vector<DiagramExpression>& es, int vertex_budget) {
    return product_impl(es, vertex_budget, true);
}

std::optional<std::pair<int, int>> find_hanging_double_edge(const CanonicalDiagram& d) {
    const CellMatrix& g = d.cells();
    const Diagram& a = d.diagram();
    for (int v = 0; v < g.size(); ++v) {
        if (a.root && *a.root == v) continue;
        if (!g.at(v, v).empty()) continue;
        auto nb = g.neighbors(v);
        if (nb.size() != 1) continue;
        int u = nb[0];
        if (!(g.at(u, v) == Cell{2, 0})) continue;
        // u must keep an edge (or be the root) once v is gone.
        bool keeps = (a.root && *a.root == u) || !g.at(u, u).empty() || g.neighbors(u).size() > 1;
        if (keeps) return std::make_pair(v, u);
    }
    return std::nullopt;
}

DiagramExpression remove_hanging_double_edge(const DiagramTerm& t) {
    auto h = find_hanging_double_edge(*t.diagram);
    if (!h) throw PreconditionError("diagram has no hanging double edge: " + t.diagram->key());
    auto [v, u] = *h;
    const Diagram& a = t.diagram->diagram();
    int nv = a.vertex_count;
    Diagram a0, a2 = a;
    a0.vertex_count = nv - 1;
    auto idx = [v](int x) { return x > v ? x - 1 : x; };
    if (a.root) a0.root = idx(*a.root);
    a2.edges.clear();
    for (const auto& e : a.edges) {
        bool hanging = (e.u == v || e.v == v);
        if (!hanging) {
            a0.add_edge(idx(e.u), idx(e.v), e.multiplicity, e.label);
            a2.add_edge(e.u, e.v, e.multiplicity, e.label);
        }
    }
    a2.add_edge(u, v, 1, EdgeLabel::two);
    DiagramExpression out(t.diagram->rooted() ? Kind::vector : Kind::scalar);
    Coefficient c0 = Coefficient(1) - Coefficient::power(2, Rational(nv - 1));
    out.add(a0, t.coefficient * c0);
    out.add(a2, t.coefficient);
    return out;
}

DiagramExpression drop_negligible(const DiagramExpression& e) {
    DiagramExpression out(e.kind(), e.basis());
    for (const auto& [k, t] : e.terms())
        for (const auto& [tk, c] : t.coefficient.terms()) {
            Coefficient part = Coefficient::power(tk, c);
            Order o = classify(part, *t.diagram);
            if (o == Order::SuperOrder1)
                throw ConsistencyError("super-order-1 term " + part.str() + " * " + k);
            if (o == Order::Order1) out.add(t.diagram, part);
        }
    return out;
}

StripResult strip_hanging(const DiagramExpression& e) {
    DiagramExpression done(e.kind(), e.basis());
    DiagramExpression work = e;
    while (!work.empty()) {
        DiagramExpression next(e.kind(), e.basis());
        for (const auto& [k, t] : work.terms()) {
            if (find_hanging_double_edge(*t.diagram)) next += remove_hanging_double_edge(t);
            else done.add(t.diagram, t.coefficient);
        }
        work = std::move(next);
    }
    return {done, drop_negligible(done)};
}

DiagramExpression repeated_label_expand(const DiagramRef& d) {
    const Diagram& a = d->diagram();
    DiagramExpression out(d->rooted() ? Kind::vector : Kind::scalar);
    for_each_partition(a.vertex_count, [&](const std::vector<int>& blk, int count) {
        out.add(contract(a, blk, count), Coefficient(1));
    });
    return out;
}

DiagramExpression injective_from_repeated(const DiagramRef& d) {
    {
        std::shared_lock lock(moebius_mu);
        auto it = moebius_cache.find(d->key());
        if (it != moebius_cache.end()) return it->second;
    }
    const Diagram& a = d->diagram();
    DiagramExpression out(d->rooted() ? Kind::vector : Kind::scalar, Basis::repeated_label);
    std::vector<long> fact{1};
    for (int i = 1; i <= a.vertex_count; ++i) fact.push_back(fact.back() * i);
    for_each_partition(a.vertex_count, [&](const std::vector<int>& blk, int count) {
        std::vector<int> size(count, 0);
        for (int b : blk) size[b]++;
        Rational mu = 1;
        for (int s : size) mu *= ((s - 1) % 2 ? -1 : 1) * fact[s - 1];
        out.add(contract(a, blk, count), Coefficient(mu));
    });
    std::unique_lock lock(moebius_mu);
    moebius_cache.emplace(d->key(), out);
    return out;
}

DiagramExpression to_injective(const DiagramExpression& rl) {
    if (rl.basis() != Basis::repeated_label) throw KindError("expected a repeated-label expression");
    DiagramExpression out(rl.kind());
    for (const auto& [k, t] : rl.terms()) out += t.coefficient * repeated_label_expand(t.diagram);
    return out;
}

DiagramExpression unroot_average(const DiagramExpression& e) {
    if (e.kind() != Kind::vector) throw KindError("unroot_average needs a vector expression");
    DiagramExpression out(Kind::scalar);
    for (const auto& [k, t] : e.terms()) {
        const Diagram& a = t.diagram->diagram();
        int r = *a.root;
        bool isolated_root = t.diagram->cells().neighbors(r).empty() && t.diagram->cells().at(r, r).empty();
        Diagram s = a;
        s.root.reset();
        if (isolated_root) {
            // The root sum only counts the labels left free: n - (|V| - 1).
            std::vector<int> blk(a.vertex_count);
            for (int v = 0; v < a.vertex_count; ++v) blk[v] = v < r ? v : v - 1;
            Diagram rest;
            rest.vertex_count = a.vertex_count - 1;
            for (const auto& ed : a.edges) rest.add_edge(blk[ed.u], blk[ed.v], ed.multiplicity, ed.label);
            Coefficient c = Coefficient(1) - Coefficient::power(2, Rational(a.vertex_count - 1));
            out.add(rest, t.coefficient * c);
        } else {
            out.add(s, t.coefficient * Coefficient::power(2));
        }
    }
    return out;
}

Coefficient exact_second_moment(const DiagramRef& d) {
    if (!d->proper()) throw PreconditionError("exact_second_moment needs a proper diagram");
    if (!d->rooted()) throw KindError("exact_second_moment needs a vector diagram");
    // prod_{j=1}^{V-1} (n - j) as coefficients of n^m
    int v = d->vertex_count();
    std::vector<Rational> poly{1};
    for (int j = 1; j < v; ++j) {
        std::vector<Rational> next(poly.size() + 1, 0);
        for (size_t m = 0; m < poly.size(); ++m) {
            next[m + 1] += poly[m];
            next[m] -= poly[m] * j;
        }
        poly = std::move(next);
    }
    Coefficient out;
    int e = d->edge_count();
    Rational aut(std::to_string(d->aut()));
    for (size_t m = 0; m < poly.size(); ++m)
        out += Coefficient::power(2 * (e - int(m)), poly[m] * aut);
    return out;
}

}  // namespace fdc
