#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "atsp/rational.hpp"

namespace atsp {

// Sorted, duplicate-free list of vertex ids.
using VertexSet = std::vector<int>;

struct Edge {
  int id = -1;
  int tail = -1;
  int head = -1;
  // Edge of the parent graph this one was split from, redirected from, or
  // contracted from. Absent for edges of an input graph.
  std::optional<int> preimage;
};

// Directed multigraph. Edge ids equal their index and never change once
// assigned; derived graphs refer back through `preimage`.
class Digraph {
 public:
  Digraph() = default;
  explicit Digraph(int n);

  int add_edge(int tail, int head, std::optional<int> preimage = std::nullopt);

  int num_vertices() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const Edge& edge(int id) const { return edges_.at(id); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& out_edges(int v) const { return out_.at(v); }
  const std::vector<int>& in_edges(int v) const { return in_.at(v); }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
};

// Per-edge rational values indexed by edge id (weights, capacities, x).
using EdgeValues = std::vector<Rational>;

// Multiset of edges. Zero counts are never stored.
class EdgeMultiset {
 public:
  EdgeMultiset() = default;

  void add(int edge, std::int64_t count = 1);
  void add(const EdgeMultiset& other);
  std::int64_t count(int edge) const;
  bool empty() const { return counts_.empty(); }
  std::int64_t size() const;
  const std::map<int, std::int64_t>& counts() const { return counts_; }

  bool operator==(const EdgeMultiset& other) const = default;

 private:
  std::map<int, std::int64_t> counts_;
};

// A connected Eulerian multiset with one Euler walk through it. An empty
// subtour has no edges; `vertices` may still name a single isolated vertex.
struct Subtour {
  EdgeMultiset edges;
  std::vector<int> walk;
  VertexSet vertices;
};

VertexSet make_vertex_set(std::vector<int> vs);
bool contains(const VertexSet& s, int v);
VertexSet set_union(const VertexSet& a, const VertexSet& b);
VertexSet set_intersection(const VertexSet& a, const VertexSet& b);
VertexSet set_difference(const VertexSet& a, const VertexSet& b);
bool is_subset(const VertexSet& a, const VertexSet& b);
bool intersects(const VertexSet& a, const VertexSet& b);
std::vector<char> membership(int n, const VertexSet& s);
VertexSet all_vertices(int n);

// Sum of values over edges leaving / entering / crossing S (in either direction).
Rational out_value(const Digraph& g, const EdgeValues& val, const VertexSet& s);
Rational in_value(const Digraph& g, const EdgeValues& val, const VertexSet& s);
Rational cut_value(const Digraph& g, const EdgeValues& val, const VertexSet& s);

Rational multiset_cost(const EdgeMultiset& f, const EdgeValues& w);
VertexSet multiset_vertices(const Digraph& g, const EdgeMultiset& f);

// Strongly connected components of G[restrict] in topological order: no edge
// goes from a later component to an earlier one. Each component is sorted.
std::vector<VertexSet> scc_topological(const Digraph& g, const VertexSet& restrict);

bool strongly_connected(const Digraph& g, const VertexSet& restrict);

struct CutResult {
  Rational value;
  VertexSet source_side;  // contains s, excludes t
};

// Exact max flow / min cut. The returned side is the residual reach of s.
CutResult min_st_cut(const Digraph& g, const EdgeValues& cap, int s, int t);

struct Path {
  std::vector<int> edges;
  Rational weight;
};

// Minimum-weight u-v path inside `restrict`. Among minimum-weight paths the
// one with fewest edges wins, then the lexicographically smallest edge-id
// sequence. `edge_allowed`, when given, masks out edges.
std::optional<Path> shortest_path(const Digraph& g, const EdgeValues& w, int u,
                                  int v, const VertexSet& restrict,
                                  const std::vector<char>* edge_allowed = nullptr);

// Single-source distances inside `restrict`; absent for unreachable vertices.
std::vector<std::optional<Rational>> shortest_distances(
    const Digraph& g, const EdgeValues& w, int source, const VertexSet& restrict);

// Splits an Eulerian multiset into its connected components, each with a
// Hierholzer walk started at the component's smallest vertex and always
// taking the smallest unused edge id. Components come sorted by smallest vertex.
std::vector<Subtour> eulerian_components(const Digraph& g, const EdgeMultiset& f);

struct WeightedCycleEdges {
  std::vector<int> edges;  // a simple directed cycle in walk order
  Rational weight;
};

// Splits a circulation into simple cycles by repeated walk stripping: start
// at the smallest edge id with residual flow, follow the smallest residual
// out-edge until a vertex repeats, peel off that loop. Throws SolveError
// when x is not a circulation.
std::vector<WeightedCycleEdges> cycle_decomposition(const Digraph& g, const EdgeValues& x);

// Minimum-weight closed walk inside `u` visiting every vertex of u: exact
// bitmask DP over the shortest-path closure of G[u], started at u's smallest
// vertex. |u| <= 16. The empty walk when |u| = 1; absent when G[u] is not
// strongly connected.
std::optional<Subtour> min_closed_walk(const Digraph& g, const EdgeValues& w, const VertexSet& u);

// Vertices where in-degree and out-degree of f differ.
std::vector<int> degree_imbalance(const Digraph& g, const EdgeMultiset& f);

// Walk-order vertex sequence of a subtour, starting at the tail of walk[0].
std::vector<int> walk_vertices(const Digraph& g, const std::vector<int>& walk);

constexpr std::int64_t kInfiniteCapacity = std::int64_t{1} << 50;

struct FlowArc {
  int tail = -1;
  int head = -1;
  std::int64_t lower = 0;
  std::int64_t upper = kInfiniteCapacity;
  Rational cost;
};

struct FlowNetwork {
  int num_nodes = 0;
  std::vector<FlowArc> arcs;
  std::vector<std::int64_t> supply;  // positive = source; sums to zero

  int add_node();
  int add_arc(int tail, int head, std::int64_t lower, std::int64_t upper,
              Rational cost);
};

struct FlowSolution {
  std::vector<std::int64_t> flow;
  Rational cost;
};

// Integral min-cost flow by successive shortest paths with potentials.
// Lower bounds are moved into node supplies; negative-cost arcs must have
// finite capacity and start saturated. Throws InfeasibleFlow.
FlowSolution min_cost_integral_flow(const FlowNetwork& net);

}  // namespace atsp
