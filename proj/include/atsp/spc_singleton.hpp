#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "atsp/graph.hpp"
#include "atsp/instance.hpp"

namespace atsp {

// A Subtour Partition Cover solver: given backbone B and a partition of
// V \ V(B) into strongly connected classes, returns an Eulerian F with at
// least one edge leaving every class.
using SpcOracle = std::function<EdgeMultiset(const Instance&, const Subtour& backbone,
                                             const std::vector<VertexSet>& partition)>;

// Throws SolveError("invalid partition: ...") unless the classes are
// nonempty, disjoint, cover exactly V \ V(B), none equals V, and each
// induces a strongly connected subgraph.
void validate_partition(const Instance& inst, const VertexSet& backbone_vertices,
                        const std::vector<VertexSet>& partition);

// Classes V_i with no edge of f leaving them.
std::vector<int> uncovered_classes(const Digraph& g, const EdgeMultiset& f,
                                   const std::vector<VertexSet>& partition);

struct LightnessCheck {
  bool ok = true;
  std::string reason;
  std::optional<Subtour> offending;  // first component breaking the alpha bound
  Rational backbone_weight;          // weight of components meeting B
};

// (alpha, beta)-lightness of f: every component T disjoint from B has
// w(T) <= alpha * lb(T), and the components meeting B weigh <= beta in total.
// Also checks that f is Eulerian.
LightnessCheck check_lightness(const Instance& inst, const VertexSet& backbone_vertices,
                               const EdgeMultiset& f, const Rational& alpha,
                               const Rational& beta);

struct SpcSingletonStats {
  int cycles = 0;           // pieces of the cycle decomposition after splitting
  int redirected = 0;       // edge occurrences redirected to or from an auxiliary vertex
  Rational rounded_cost;    // cost of z' before repair walks
  std::vector<int> repair_lengths;  // |P_i| per class
};

// (2,0)-light cover for singleton instances with an empty backbone. Every
// vertex v with y_v > 0 is left at most twice by the output, so each
// component T has w(T) <= 2 lb(T). Throws SolveError on a non-singleton
// instance or an invalid partition.
EdgeMultiset solve_spc_singleton(const Instance& inst, const std::vector<VertexSet>& partition,
                                 SpcSingletonStats* stats = nullptr);

}  // namespace atsp
