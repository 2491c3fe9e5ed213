#pragma once

#include <optional>
#include <vector>

#include "atsp/graph.hpp"
#include "atsp/instance.hpp"

namespace atsp {

// Strongly connected components of tight S in topological order. Throws
// SolveError when S is not tight or the chain identities
//   delta-(S_1) = delta-(S), delta+(S_k-1) = delta-(S_k), delta+(S_l) = delta+(S)
// fail.
std::vector<VertexSet> scc_chain(const Instance& inst, const VertexSet& s);

// Number of edges of `edges` with exactly one endpoint in r.
int crossings(const Digraph& g, const std::vector<int>& edges, const VertexSet& r);

struct ShortPathResult {
  Path path;
  int repairs = 0;
};

// u-v path inside S crossing every laminar set at most twice, and every
// R strictly inside S at most 2 - |R & {u,v}| times when u is an entry or v an
// exit of S. Repairs `initial` (default: the min-weight path) by rerouting
// through the largest violated set, ties to the smallest set id. L u {S}
// must be laminar. Throws SolveError when v is unreachable inside S.
ShortPathResult short_path(const Instance& inst, const VertexSet& s, int u, int v,
                           const std::optional<std::vector<int>>& initial = std::nullopt);

// Largest number of crossings `edges` may have with r under the rules above.
int allowed_crossings(const Instance& inst, const VertexSet& s, const VertexSet& r,
                      int u, int v);

std::optional<Rational> distance_dS(const Instance& inst, const VertexSet& s, int u, int v);
// d_S(u,v) plus y_R for every laminar R strictly inside S and each of u, v in R.
std::optional<Rational> distance_DS(const Instance& inst, const VertexSet& s, int u, int v);

struct MaxDS {
  Rational value;
  int u = -1;  // entry vertex attaining the maximum (smallest pair on ties)
  int v = -1;  // exit vertex
};
// Maximum of D_S over entries x exits. Asserts D_S <= value(S) on every pair.
MaxDS max_DS(const Instance& inst, const VertexSet& s);

enum class ReductionKind { kContract, kInduce };

// Bookkeeping linking a derived instance to its parent. Child edges carry
// their parent edge as preimage.
struct ContractionRecord {
  ReductionKind kind = ReductionKind::kContract;
  VertexSet set;                // S in the parent
  int new_vertex = -1;          // s (contract) or s-bar (induce) in the child
  std::vector<int> vertex_map;  // parent vertex -> child vertex
  std::vector<int> edge_map;    // parent edge -> child edge, -1 if dropped
  Rational new_y;               // y of the child's new singleton
  MaxDS max_d;                  // contract only
};

// I/S. The new singleton gets y_S + max D_S / 2.
std::pair<Instance, ContractionRecord> contract(const Instance& inst, const VertexSet& s);
// I[S]: contracts V \ S, keeps the sets strictly inside S, y(s-bar) = value(S)/2.
std::pair<Instance, ContractionRecord> induce(const Instance& inst, const VertexSet& s);

struct LiftOptions {
  // Use min-weight paths through all of V instead of inside S.
  bool unrestricted_paths = false;
};

// Replaces each pass (u_in, s), (s, v_out) of `tour` through s with the
// preimage edges and a min-weight path between them. Throws SolveError when
// `tour` is not a tour of the contracted instance.
Subtour lift(const Instance& parent, const Instance& child, const ContractionRecord& rec,
             const EdgeMultiset& tour, const LiftOptions& opts = {});

// Same expansion for any nonempty connected Eulerian multiset of the
// contracted instance; one that avoids s just maps to its preimages.
Subtour lift_subtour(const Instance& parent, const Instance& child, const ContractionRecord& rec,
                     const EdgeMultiset& subtour, const LiftOptions& opts = {});

struct ContractibleResult {
  EdgeMultiset f;                 // parent edges
  std::vector<VertexSet> components;
  std::vector<int> stitches;      // stitch paths added per component
  int visits = 0;                 // visits of the tour to s-bar
};

// From a tour of I[S], one closed walk per strongly connected component of S:
// the tour's edges inside the component, with each exit joined to the next
// re-entry (in Euler-walk order) by a min-weight path inside the component.
ContractibleResult make_contractible(const Instance& parent, const Instance& child,
                                     const ContractionRecord& rec, const EdgeMultiset& tour);

// max D_S < delta * value(S). Singletons are never reducible.
bool is_reducible(const Instance& inst, const VertexSet& s, const Rational& delta);

// Tour test shared by the reductions: Eulerian, connected, covers V.
bool is_tour(const Digraph& g, const EdgeMultiset& f);

}  // namespace atsp
