#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "atsp/graph.hpp"
#include "atsp/rational.hpp"

namespace atsp {

// Optimal point of the subtour-elimination LP: min w.x over circulations x >= 0
// with x(delta(S)) >= 2 for every nonempty proper S.
struct HeldKarpSolution {
  EdgeValues x;
  Rational value;
  // Every cut row present at termination, singletons first, in row order.
  std::vector<VertexSet> cuts;
  // Duals of the final LP: alpha per vertex (degree rows), one per cut row.
  std::vector<Rational> alpha;
  std::vector<Rational> cut_duals;
  long pivots = 0;
  int rounds = 0;
};

// alpha_u - alpha_v + sum_{S : (u,v) in delta(S)} y_S <= w(u,v) on every edge,
// y > 0 on `family`, objective 2 * sum y.
struct DualSolution {
  std::vector<Rational> alpha;
  std::vector<VertexSet> family;  // size descending, then lexicographic
  std::vector<Rational> y;        // parallel to family, all positive
  long uncross_steps = 0;
};

// Throws SolveError("no feasible tour") when g is not strongly connected.
HeldKarpSolution solve_held_karp(const Digraph& g, const EdgeValues& w);

// A set S with x(delta+(S)) < 1, the most violated one found by min cuts
// between vertex 0 and every other vertex in both directions.
std::optional<VertexSet> separate(const Digraph& g, const EdgeValues& x);

// Uncrosses the row-generation dual into a laminar optimal dual. Every
// postcondition (laminarity, objective, feasibility, slackness) is checked.
DualSolution extract_laminar_dual(const Digraph& g, const EdgeValues& w,
                                  const HeldKarpSolution& hk);

// A and B cross when A&B, A\B and B\A are all nonempty.
bool crossing(const VertexSet& a, const VertexSet& b);
bool is_laminar(const std::vector<VertexSet>& family);

// Moves eps = min(y_A, y_B) from A and B onto A\B and B\A. Zero entries are
// erased. Throws SolveError("not a crossing pair") otherwise.
void uncross_step(std::map<VertexSet, Rational>& y, const VertexSet& a,
                  const VertexSet& b);

// Independent audit of the DualSolution invariants against (g, w, x).
// Returns human-readable failures; empty means all hold.
std::vector<std::string> audit_dual(const Digraph& g, const EdgeValues& w,
                                    const EdgeValues& x, const Rational& value,
                                    const DualSolution& dual);

}  // namespace atsp
