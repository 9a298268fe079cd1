#pragma once

#include "fdc/expression.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace fdc {

constexpr int kDefaultVertexBudget = 12;

// Merge vertices of d according to block[v]; the root follows its block.
Diagram contract(const Diagram& d, const std::vector<int>& block, int block_count);

// Calls f(block, block_count) for every set partition of {0..n-1}.
void for_each_partition(int n, const std::function<void(const std::vector<int>&, int)>& f);

// Set partitions in which no block holds two items whose group masks overlap.
void for_each_constrained_partition(const std::vector<std::uint64_t>& mask,
                                    const std::function<void(const std::vector<int>&, int)>& f);

DiagramExpression multiply_by_A(const DiagramExpression& e);

DiagramExpression pointwise_product(const std::vector<DiagramExpression>& es,
                                    int vertex_budget = kDefaultVertexBudget);

// Products mixing vector and scalar factors; the result is vector iff any factor is.
DiagramExpression scalar_product(const std::vector<DiagramExpression>& es,
                                 int vertex_budget = kDefaultVertexBudget);

// Product of single diagrams (one intersection-pattern sum).
DiagramExpression diagram_product(const std::vector<DiagramRef>& factors,
                                  int vertex_budget = kDefaultVertexBudget);

// Returns (far endpoint, near endpoint) of a hanging plain double edge, if any.
std::optional<std::pair<int, int>> find_hanging_double_edge(const CanonicalDiagram& d);

DiagramExpression remove_hanging_double_edge(const DiagramTerm& t);

struct StripResult {
    DiagramExpression exact;
    DiagramExpression asymptotic;
};
StripResult strip_hanging(const DiagramExpression& e);

// Keeps only the exponent parts of each coefficient that are not negligible.
DiagramExpression drop_negligible(const DiagramExpression& e);

DiagramExpression repeated_label_expand(const DiagramRef& d);
DiagramExpression injective_from_repeated(const DiagramRef& d);
// Rewrites a repeated-label expression in the injective basis.
DiagramExpression to_injective(const DiagramExpression& rl);

DiagramExpression unroot_average(const DiagramExpression& e);

Coefficient exact_second_moment(const DiagramRef& d);

}  // namespace fdc
