#pragma once

#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "atsp/instance.hpp"

namespace atsp {

// Small hand-built instances with known structure, shared by tests, the
// acceptance driver and `generate`.
struct Gadget {
  std::string name;
  Instance inst;
  VertexSet focus;                   // the set the gadget is built around
  std::map<std::string, int> named;  // labelled vertices
};

struct WeightedCycle {
  std::vector<int> vertices;  // closed: last vertex returns to the first
  Rational weight;
};

// x = sum of weight * cycle, one edge per ordered pair used.
Instance instance_from_cycles(int n, const std::vector<WeightedCycle>& cycles,
                              std::vector<std::pair<VertexSet, Rational>> laminar);

// S = {a,b,c,d} entered only at a, left only at c, with D_S(a,c) = 22:
// y_{a} = 2, y_{b} = 2, y_{c} = 3, y_{c,d} = 4.
Gadget fig2_contraction_gadget();
// Tight S = {0,1,2,3} with strongly connected components {0,1} -> {2,3}.
Gadget series_scc_gadget();
// Five vertices; R = {1,2} is tight and 0->1->3->2->4 crosses it four times.
Gadget crossing_repair_gadget();

// Tight S = {0,1,2} between a = 3 and b = 4, y_S = 2.
Gadget single_set_gadget();
// Irreducible instance whose quasi-backbone misses the nested set R = {4,5}.
Gadget nested_unvisited_gadget();
// Same shape with S = {1..5} reducible and R = {4,5} irreducible.
Gadget nested_reducible_gadget();

std::vector<std::string> gadget_names();
Gadget gadget_by_name(const std::string& name);  // throws SolveError

// Complete digraph on n vertices with integer weights in [lo, hi].
std::pair<Digraph, EdgeValues> random_complete_digraph(std::mt19937_64& rng, int n, int lo, int hi);

// Held-Karp instance of a clustered complete digraph: cheap inside
// (sub)clusters, expensive between them, so the dual has non-singleton sets.
Instance random_clustered_instance(std::mt19937_64& rng, int n);

// Convex combination of 2-4 random Hamiltonian cycles, each traversing every
// cluster (and nested sub-cluster) contiguously, so every cluster is tight.
// Clusters get y in [1, 3], singletons y in [0, 3]. n >= 3.
Instance random_laminar_instance(std::mt19937_64& rng, int n);

// Convex combination of 2-4 random Hamiltonian cycles with only singleton
// sets, y in [0, 3] and at least one positive. n >= 3.
Instance random_singleton_instance(std::mt19937_64& rng, int n);

struct VertebratePair {
  Instance inst;
  Subtour backbone;
};

// Random laminar instance with a backbone of shortest paths through one random
// vertex of every minimal non-singleton set (one random vertex if none).
VertebratePair random_vertebrate_pair(std::mt19937_64& rng, int n);

// Closed walk of shortest paths visiting `targets` in order; a single target
// gets its cheapest cycle. Throws SolveError when some target is unreachable.
Subtour backbone_through(const Instance& inst, const std::vector<int>& targets);

// Disjoint sets off the backbone, each strongly connected and inside a
// single innermost non-singleton region (singletons or whole components).
std::vector<VertexSet> random_u_family(std::mt19937_64& rng, const Instance& inst, const VertexSet& backbone_vertices);

// Partition of V \ excluded into strongly connected classes: random groups
// split into their strongly connected components.
std::vector<VertexSet> random_scc_partition(std::mt19937_64& rng, const Instance& inst, const VertexSet& excluded);
}  // namespace atsp
