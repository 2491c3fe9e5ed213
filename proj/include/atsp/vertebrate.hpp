#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "atsp/graph.hpp"
#include "atsp/instance.hpp"

namespace atsp {

// S_1..S_l = non-singleton laminar sets plus V, by size ascending (ties by
// canonical id); level(v) = smallest index of a set containing v.
struct LevelOrder {
  std::vector<VertexSet> sets;
  std::vector<int> level;
};

LevelOrder level_order(const Instance& inst);

// (u,v) is forward when level(v) < level(u), backward when level(u) < level(v).
enum class EdgeKind { kForward, kBackward, kNeutral };

std::vector<EdgeKind> classify_edges(const Digraph& g, const LevelOrder& order);

// Ids of stored sets with at least two vertices that the backbone misses.
std::vector<int> unvisited_nonsingletons(const Instance& inst, const VertexSet& backbone_vertices);

struct WitnessFlow {
  EdgeValues f;
  Rational objective;  // f(E_f) at the LP optimum
  Rational forward_mass;  // x(E_f)
};

// f <= z, f(delta+(v)) >= f(delta-(v)) off the backbone, f = 0 on backward
// and f = z on forward edges. Empty means f is a witness flow for z.
std::vector<std::string> witness_flow_violations(const Digraph& g, const std::vector<EdgeKind>& kinds,
                                                 const EdgeValues& z, const EdgeValues& f,
                                                 const VertexSet& backbone_vertices);

// Maximizes f(E_f) subject to the witness constraints with z = x. Throws
// SolveError when the optimum is below x(E_f), which only happens when some
// non-singleton set misses the backbone.
WitnessFlow compute_witness_flow(const Instance& inst, const VertexSet& backbone_vertices);

// One parallel copy of an instance edge carrying x-mass `x`; f = x on a
// marked copy and f = 0 on an unmarked one.
struct MarkedCopy {
  int edge = -1;
  Rational x;
  bool marked = false;
};

// Edges with 0 < f < x become a marked copy (mass f) and an unmarked copy
// (mass x - f). Copies come by edge id, marked first.
std::vector<MarkedCopy> split_to_marks(const Digraph& g, const EdgeValues& x, const EdgeValues& f);

// Closed walk over copies, in walk order.
struct TwoCycle {
  std::vector<int> copies;
  Rational lambda;
};

// Walk visits each vertex at most twice and each copy at most once, and at
// every vertex off the backbone a marked arrival is followed by a marked
// departure (cyclically). Empty string means all hold.
std::string two_cycle_defect(const Digraph& g, const std::vector<MarkedCopy>& copies,
                             const std::vector<int>& cycle, const VertexSet& backbone_vertices);

// x = sum lambda_j 1_{C_j} over consistent 2-cycles. Walks start at the
// smallest residual copy, prefer a copy of the same mark (smallest id) and
// close at a repeated vertex by the three termination rules. The residual
// witness balance off the backbone is asserted after every extraction.
// Throws SolveError when the input violates that balance or is not a circulation.
std::vector<TwoCycle> consistent_2cycle_decomposition(const Digraph& g, const std::vector<MarkedCopy>& copies,
                                                      const VertexSet& backbone_vertices);

struct TuRounding {
  std::vector<std::int64_t> z;
  std::vector<std::int64_t> f;
  Rational cost;  // w . z
};

// Integral (z, f) from a circulation z >= f >= 0 with w . z not larger and
//   f(delta+) >= f(delta-) kept wherever it held,
//   floor/ceil of f(delta-(v)) and (z - f)(delta-(v)) respected,
//   f <= z, f = z where f = z, f = 0 where f = 0.
// Solved as a min-cost circulation on four nodes per vertex; all properties
// are asserted on the result. w must be nonnegative.
TuRounding tu_round(const Digraph& g, const EdgeValues& w, const EdgeValues& z, const EdgeValues& f);

struct MainLemmaStats {
  int copies = 0;
  int two_cycles = 0;
  std::vector<char> marked_entry;  // per U_j: X_j^- all marked
  Rational rounded_cost;           // w' . z-bar'
  std::vector<int> repair_lengths;
  EdgeValues witness;              // f* on instance edges
};

// Throws SolveError naming the offending set unless U_1..U_l are nonempty,
// disjoint, avoid the backbone, induce strongly connected subgraphs and are
// nested in or disjoint from every non-singleton laminar set.
void validate_u_family(const Instance& inst, const VertexSet& backbone_vertices, const std::vector<VertexSet>& us);

// Eulerian F with w(F) <= 2 value + lb(B-bar), every U_j entered, at most four
// entries into each v with x(delta-(v)) = 1, and every subtour crossing a
// non-singleton set meeting the backbone. All four are asserted.
EdgeMultiset solve_main_lemma(const Instance& inst, const VertexSet& backbone_vertices,
                              const std::vector<VertexSet>& us, MainLemmaStats* stats = nullptr);

// Per class: intersect with the smallest non-singleton set (or V) meeting it,
// take the source strongly connected component as U_i, and run the main
// lemma. The output is asserted to cover every class and to be
// (4, 2 value + lb(B-bar))-light. An empty backbone delegates to the
// singleton algorithm.
EdgeMultiset solve_spc_vertebrate(const Instance& inst, const Subtour& backbone,
                                  const std::vector<VertexSet>& partition);

// The U_i chosen by solve_spc_vertebrate.
std::vector<VertexSet> source_components(const Instance& inst, const std::vector<VertexSet>& partition);

struct WitnessedCheck {
  bool ok = true;
  std::optional<Subtour> counterexample;  // crosses a non-singleton set, misses B
};

// The conclusion of the witness-flow argument on the components of z.
WitnessedCheck verify_witnessed_components(const Instance& inst, const EdgeMultiset& z,
                                           const VertexSet& backbone_vertices);

}  // namespace atsp
