#pragma once

#include "fdc/coefficient.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fdc {

enum class EdgeLabel { plain = 1, two = 2 };

struct Edge {
    int u = 0;
    int v = 0;
    int multiplicity = 1;
    EdgeLabel label = EdgeLabel::plain;
};

/**
 * Plain multigraph input. A missing root makes it a scalar diagram.
 * Edges may repeat; they are merged on canonicalization.
 */
struct Diagram {
    int vertex_count = 0;
    std::optional<int> root;
    std::vector<Edge> edges;

    bool is_scalar() const { return !root.has_value(); }
    void validate() const;  // throws StructuralError

    Diagram& add_edge(int u, int v, int multiplicity = 1, EdgeLabel label = EdgeLabel::plain);
};

// Parallel edges between one vertex pair, split by label.
struct Cell {
    int p = 0;  // plain
    int q = 0;  // two-labeled
    bool empty() const { return p == 0 && q == 0; }
    int count() const { return p + q; }
    bool operator==(const Cell& o) const { return p == o.p && q == o.q; }
};

/** Symmetric cell matrix of a diagram; loops sit on the diagonal. */
class CellMatrix {
public:
    CellMatrix() = default;
    explicit CellMatrix(const Diagram& d);
    int size() const { return n_; }
    const Cell& at(int u, int v) const { return cells_[u * n_ + v]; }
    Cell& at(int u, int v) { return cells_[u * n_ + v]; }
    std::vector<int> neighbors(int v) const;  // excludes v itself

private:
    int n_ = 0;
    std::vector<Cell> cells_;
};

class CanonicalDiagram;
using DiagramRef = std::shared_ptr<const CanonicalDiagram>;

struct TreeStructure {
    std::vector<std::pair<DiagramRef, int>> branches;  // sigma -> d_sigma, sorted by key
    int depth = 0;
};

class CanonicalDiagram {
public:
    const std::string& key() const { return key_; }
    std::uint64_t aut() const { return aut_; }
    // Canonically relabelled representative; for rooted diagrams the root is vertex 0.
    const Diagram& diagram() const { return rep_; }
    const CellMatrix& cells() const { return cells_; }

    bool rooted() const { return rep_.root.has_value(); }
    int vertex_count() const { return rep_.vertex_count; }
    int edge_count() const { return edge_count_; }  // two-labeled edges count twice
    int isolated_count() const { return isolated_count_; }
    int component_count() const { return component_count_; }
    int floating_count() const { return rooted() ? component_count_ - 1 : component_count_; }
    bool forest_shaped() const { return forest_shaped_; }
    bool has_loops() const { return has_loops_; }
    bool has_labels() const { return has_labels_; }
    bool proper() const { return proper_; }
    bool is_tree() const { return tree_.has_value(); }
    const std::optional<TreeStructure>& tree() const { return tree_; }

    bool operator==(const CanonicalDiagram& o) const { return key_ == o.key_; }

private:
    friend DiagramRef canonicalize(const Diagram& d);
    std::string key_;
    std::uint64_t aut_ = 1;
    Diagram rep_;
    CellMatrix cells_;
    int edge_count_ = 0;
    int isolated_count_ = 0;
    int component_count_ = 0;
    bool forest_shaped_ = true;
    bool has_loops_ = false;
    bool has_labels_ = false;
    bool proper_ = true;
    std::optional<TreeStructure> tree_;
};

DiagramRef canonicalize(const Diagram& d);

std::vector<int> isolated_set(const Diagram& d);

enum class Order { Negligible, Order1, SuperOrder1 };
const char* to_string(Order o);

// V-1-E+I for vector diagrams, V-E+I for scalar ones.
int order_statistic(const CanonicalDiagram& d);

// Classification by the leading exponent of the coefficient.
Order classify(const Coefficient& c, const CanonicalDiagram& d);

/**
 * Structural characterization of connected order-1 vector diagrams:
 * a tree with multiplicities 1 or 2 whose multiplicity-1 edges form a
 * subtree containing the root, no loops, no labels.
 */
bool structurally_nonnegligible(const CanonicalDiagram& d);

const std::optional<TreeStructure>& tree_structure(const CanonicalDiagram& d);

// Brute-force count of root-fixing automorphisms; only for small diagrams.
std::uint64_t brute_force_aut(const Diagram& d);
bool brute_force_isomorphic(const Diagram& a, const Diagram& b);

namespace shapes {
Diagram singleton();
Diagram edge();
Diagram self_loop();
Diagram path(int t);          // rooted at an endpoint
Diagram star(int d);          // rooted at the center
Diagram cycle(int len);       // rooted on the cycle
Diagram double_edge();
Diagram two_labeled_edge();
Diagram one_two_tree();       // root - v, v with two leaves
Diagram extended_star(int d); // root - center, center with d leaves
Diagram scalar_edge();
}  // namespace shapes

// Tree with the root joined to copies of the given root-degree-one trees.
Diagram join_branches(const std::vector<std::pair<DiagramRef, int>>& branches);

}  // namespace fdc
