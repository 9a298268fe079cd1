#pragma once

#include "fdc/diagram.hpp"

#include <random>
#include <vector>

namespace fdc::testing {

// Random valid diagram; rooted unless scalar is requested.
inline Diagram random_diagram(std::mt19937_64& rng, int vertices, int extra_edges, bool scalar = false,
                              bool proper = false) {
    Diagram d;
    d.vertex_count = vertices;
    if (!scalar) d.root = 0;
    std::uniform_int_distribution<int> pick(0, vertices - 1);
    // spanning-ish: attach each vertex to an earlier one
    for (int v = 1; v < vertices; ++v) {
        std::uniform_int_distribution<int> prev(0, v - 1);
        d.add_edge(prev(rng), v);
    }
    for (int i = 0; i < extra_edges; ++i) {
        int u = pick(rng), v = pick(rng);
        if (proper) {
            if (u == v) continue;
            bool dup = false;
            for (const auto& e : d.edges)
                if (e.u == std::min(u, v) && e.v == std::max(u, v)) dup = true;
            if (dup) continue;
            d.add_edge(u, v);
        } else {
            std::uniform_int_distribution<int> lab(0, 5);
            d.add_edge(u, v, 1 + (lab(rng) == 0), lab(rng) == 1 ? EdgeLabel::two : EdgeLabel::plain);
        }
    }
    if (scalar && vertices == 1) d.add_edge(0, 0);
    return d;
}

inline Diagram permuted(const Diagram& d, std::mt19937_64& rng) {
    std::vector<int> p(d.vertex_count);
    for (int i = 0; i < d.vertex_count; ++i) p[i] = i;
    std::shuffle(p.begin(), p.end(), rng);
    Diagram r;
    r.vertex_count = d.vertex_count;
    if (d.root) r.root = p[*d.root];
    for (auto e : d.edges) r.add_edge(p[e.u], p[e.v], e.multiplicity, e.label);
    std::shuffle(r.edges.begin(), r.edges.end(), rng);
    return r;
}

}  // namespace fdc::testing
