#include "fdc/diagram.hpp"

#include "fdc/errors.hpp"

namespace fdc {

const char* to_string(Order o) {
    switch (o) {
        case Order::Negligible: return "Negligible";
        case Order::Order1: return "Order1";
        case Order::SuperOrder1: return "SuperOrder1";
    }
    return "?";
}

int order_statistic(const CanonicalDiagram& d) {
    int s = d.vertex_count() - d.edge_count() + d.isolated_count();
    return d.rooted() ? s - 1 : s;
}

Order classify(const Coefficient& c, const CanonicalDiagram& d) {
    if (c.is_zero()) return Order::Negligible;
    int twice_k = c.leading_twice_k();
    int s = order_statistic(d);
    if (s <= twice_k - 1) return Order::Negligible;
    if (s == twice_k) return Order::Order1;
    return Order::SuperOrder1;
}

bool structurally_nonnegligible(const CanonicalDiagram& d) {
    if (!d.rooted() || d.component_count() != 1)
        throw PreconditionError("structural test applies to connected vector diagrams");
    if (d.has_loops() || d.has_labels() || !d.forest_shaped()) return false;
    const CellMatrix& g = d.cells();
    int n = g.size();
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (g.at(u, v).p > 2) return false;
    // Multiplicity-one edges must form a connected subgraph through the root.
    std::vector<int> seen(n, 0), stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w = 0; w < n; ++w)
            if (!seen[w] && w != v && g.at(v, w).p == 1) {
                seen[w] = 1;
                stack.push_back(w);
            }
    }
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (g.at(u, v).p == 1 && !(seen[u] && seen[v])) return false;
    return true;
}

}  // namespace fdc
