#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "atsp/graph.hpp"
#include "atsp/heldkarp.hpp"
#include "atsp/rational.hpp"

namespace atsp {

struct LaminarSet {
  VertexSet vertices;
  Rational y;
  int parent = -1;            // smallest strictly larger set containing this one
  std::vector<int> children;  // ascending id
};

// Laminar family with nonnegative y. Ids are positions in the canonical
// order (size descending, then lexicographic), so a parent always has a
// smaller id than its children. Singletons with y = 0 are not stored; a
// vertex without a stored singleton has y_v = 0.
class LaminarForest {
 public:
  LaminarForest() = default;
  // Throws SolveError on crossing or duplicate sets, negative y, or vertices
  // outside [0, n).
  LaminarForest(int n, std::vector<std::pair<VertexSet, Rational>> sets);

  int num_vertices() const { return n_; }
  int size() const { return static_cast<int>(sets_.size()); }
  const LaminarSet& set(int id) const { return sets_.at(id); }
  const std::vector<LaminarSet>& sets() const { return sets_; }

  std::optional<int> find(const VertexSet& s) const;
  Rational singleton_y(int v) const;
  // Ids of stored sets containing v, innermost first.
  std::vector<int> chain(int v) const;
  std::vector<int> roots() const;

 private:
  int n_ = 0;
  std::vector<LaminarSet> sets_;
  std::vector<int> singleton_of_;  // vertex -> set id or -1
  std::vector<int> innermost_;     // vertex -> innermost set id or -1
};

// Laminarly-weighted instance (G, L, x, y). Edge weights are not stored
// independently: w(e) is the y-mass of the sets e crosses.
class Instance {
 public:
  Instance() = default;
  Instance(Digraph g, EdgeValues x, LaminarForest laminar);

  const Digraph& graph() const { return g_; }
  int num_vertices() const { return g_.num_vertices(); }
  const EdgeValues& x() const { return x_; }
  const LaminarForest& laminar() const { return laminar_; }
  const EdgeValues& weights() const { return w_; }

 private:
  Digraph g_;
  EdgeValues x_;
  LaminarForest laminar_;
  EdgeValues w_;
};

// Keeps the edges with x > 0 (preimage = edge id in g) and the dual's laminar
// family. Throws SolveError("inconsistent primal/dual") unless every kept edge
// has w - alpha_u + alpha_v equal to its induced weight.
Instance build_instance(const Digraph& g, const EdgeValues& w,
                        const HeldKarpSolution& hk, const DualSolution& dual);

const Rational& induced_weight(const Instance& inst, int edge);
Rational cost(const Instance& inst, const EdgeMultiset& f);
// Same quantity computed set by set: sum of y_S * |delta(S) & F|.
Rational cost_by_crossings(const Instance& inst, const EdgeMultiset& f);

// 2 * sum of y_R over stored R strictly inside S.
Rational value(const Instance& inst, const VertexSet& s);
Rational total_value(const Instance& inst);

Rational lb(const Instance& inst, int v);
Rational lb_set(const Instance& inst, const VertexSet& u);
// lb of the vertices not visited by the backbone.
Rational lb_bar(const Instance& inst, const VertexSet& backbone_vertices);

bool is_singleton(const Instance& inst);
// Endpoints inside S of edges entering / leaving S.
VertexSet s_in(const Instance& inst, const VertexSet& s);
VertexSet s_out(const Instance& inst, const VertexSet& s);

// Every instance invariant, checked exactly. Cut constraints are enumerated
// for n <= 12 and separated otherwise. Empty result means valid.
std::vector<std::string> verify_instance(const Instance& inst);

nlohmann::json instance_to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);  // throws ParseError

}  // namespace atsp
