#include "fdc/diagram.hpp"

#include "fdc/errors.hpp"

#include <algorithm>
#include <numeric>

namespace fdc {

void Diagram::validate() const {
    if (vertex_count < 0) throw StructuralError("negative vertex count");
    if (root && (*root < 0 || *root >= vertex_count))
        throw StructuralError("root index out of range");
    if (!root && vertex_count == 0 && !edges.empty())
        throw StructuralError("edges on an empty diagram");
    if (root && vertex_count == 0) throw StructuralError("rooted diagram needs a vertex");
    std::vector<int> deg(vertex_count, 0);
    for (const auto& e : edges) {
        if (e.u < 0 || e.v < 0 || e.u >= vertex_count || e.v >= vertex_count)
            throw StructuralError("edge endpoint out of range");
        if (e.multiplicity < 1) throw StructuralError("edge multiplicity must be positive");
        if (e.label != EdgeLabel::plain && e.label != EdgeLabel::two)
            throw StructuralError("edge label must be 1 or 2");
        deg[e.u]++;
        deg[e.v]++;
    }
    for (int v = 0; v < vertex_count; ++v)
        if (deg[v] == 0 && !(root && *root == v))
            throw StructuralError("vertex " + std::to_string(v) + " is isolated and not the root");
}

Diagram& Diagram::add_edge(int u, int v, int multiplicity, EdgeLabel label) {
    edges.push_back({std::min(u, v), std::max(u, v), multiplicity, label});
    return *this;
}

CellMatrix::CellMatrix(const Diagram& d) : n_(d.vertex_count), cells_(size_t(n_) * n_) {
    for (const auto& e : d.edges) {
        Cell& a = at(e.u, e.v);
        (e.label == EdgeLabel::plain ? a.p : a.q) += e.multiplicity;
        if (e.u != e.v) at(e.v, e.u) = a;
    }
}

std::vector<int> CellMatrix::neighbors(int v) const {
    std::vector<int> r;
    for (int w = 0; w < n_; ++w)
        if (w != v && !at(v, w).empty()) r.push_back(w);
    return r;
}

namespace {

Diagram from_cells(const CellMatrix& c, std::optional<int> root, const std::vector<int>& perm) {
    // perm[old] = new
    Diagram d;
    d.vertex_count = c.size();
    if (root) d.root = perm[*root];
    for (int u = 0; u < c.size(); ++u)
        for (int v = u; v < c.size(); ++v) {
            const Cell& x = c.at(u, v);
            if (x.p) d.add_edge(perm[u], perm[v], x.p, EdgeLabel::plain);
            if (x.q) d.add_edge(perm[u], perm[v], x.q, EdgeLabel::two);
        }
    return d;
}

bool permutation_maps(const CellMatrix& a, const CellMatrix& b, const std::vector<int>& p) {
    int n = a.size();
    for (int u = 0; u < n; ++u)
        for (int v = u; v < n; ++v)
            if (!(a.at(u, v) == b.at(p[u], p[v]))) return false;
    return true;
}

}  // namespace

std::uint64_t brute_force_aut(const Diagram& d) {
    d.validate();
    CellMatrix c(d);
    std::vector<int> p(d.vertex_count);
    std::iota(p.begin(), p.end(), 0);
    std::uint64_t count = 0;
    do {
        if (d.root && p[*d.root] != *d.root) continue;
        if (permutation_maps(c, c, p)) ++count;
    } while (std::next_permutation(p.begin(), p.end()));
    return count;
}

bool brute_force_isomorphic(const Diagram& a, const Diagram& b) {
    a.validate();
    b.validate();
    if (a.vertex_count != b.vertex_count || a.root.has_value() != b.root.has_value()) return false;
    CellMatrix ca(a), cb(b);
    std::vector<int> p(a.vertex_count);
    std::iota(p.begin(), p.end(), 0);
    do {
        if (a.root && p[*a.root] != *b.root) continue;
        if (permutation_maps(ca, cb, p)) return true;
    } while (std::next_permutation(p.begin(), p.end()));
    return false;
}

Diagram relabel(const CellMatrix& c, std::optional<int> root, const std::vector<int>& perm) {
    return from_cells(c, root, perm);
}

namespace shapes {

Diagram singleton() {
    Diagram d;
    d.vertex_count = 1;
    d.root = 0;
    return d;
}

Diagram edge() {
    Diagram d = singleton();
    d.vertex_count = 2;
    d.add_edge(0, 1);
    return d;
}

Diagram self_loop() {
    Diagram d = singleton();
    d.add_edge(0, 0);
    return d;
}

Diagram path(int t) {
    Diagram d = singleton();
    d.vertex_count = t + 1;
    for (int i = 0; i < t; ++i) d.add_edge(i, i + 1);
    return d;
}

Diagram star(int k) {
    Diagram d = singleton();
    d.vertex_count = k + 1;
    for (int i = 1; i <= k; ++i) d.add_edge(0, i);
    return d;
}

Diagram cycle(int len) {
    Diagram d = singleton();
    d.vertex_count = len;
    for (int i = 0; i < len; ++i) d.add_edge(i, (i + 1) % len);
    return d;
}

Diagram double_edge() {
    Diagram d = singleton();
    d.vertex_count = 2;
    d.add_edge(0, 1, 2);
    return d;
}

Diagram two_labeled_edge() {
    Diagram d = singleton();
    d.vertex_count = 2;
    d.add_edge(0, 1, 1, EdgeLabel::two);
    return d;
}

Diagram one_two_tree() { return extended_star(2); }

Diagram extended_star(int k) {
    Diagram d = singleton();
    d.vertex_count = k + 2;
    d.add_edge(0, 1);
    for (int i = 0; i < k; ++i) d.add_edge(1, 2 + i);
    return d;
}

Diagram scalar_edge() {
    Diagram d;
    d.vertex_count = 2;
    d.add_edge(0, 1);
    return d;
}

}  // namespace shapes

Diagram join_branches(const std::vector<std::pair<DiagramRef, int>>& branches) {
    Diagram d = shapes::singleton();
    for (const auto& [sigma, count] : branches) {
        const Diagram& s = sigma->diagram();
        for (int c = 0; c < count; ++c) {
            int base = d.vertex_count - 1;  // sigma's root (vertex 0) maps onto our root
            d.vertex_count += s.vertex_count - 1;
            for (const auto& e : s.edges) {
                int u = e.u == 0 ? 0 : base + e.u;
                int v = e.v == 0 ? 0 : base + e.v;
                d.add_edge(u, v, e.multiplicity, e.label);
            }
        }
    }
    return d;
}

}  // namespace fdc
