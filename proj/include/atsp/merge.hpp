#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <json.hpp>

#include "atsp/errors.hpp"
#include "atsp/graph.hpp"
#include "atsp/instance.hpp"
#include "atsp/spc_singleton.hpp"

namespace atsp {

// Index of "no initial subtour" in low().
constexpr int kLowInfinity = std::numeric_limits<int>::max();

// The oracle returned a cover that is not (alpha, beta)-light or misses a class.
class OracleContractBreach : public SolveError {
 public:
  OracleContractBreach(const std::string& what, std::optional<Subtour> offending)
      : SolveError("oracle contract breach: " + what), offending_(std::move(offending)) {}
  const std::optional<Subtour>& offending() const { return offending_; }

 private:
  std::optional<Subtour> offending_;
};

struct MergeParams {
  Rational alpha = 2;
  Rational beta = 0;
  Rational epsilon = make_rational(1, 4);
  // Test-only, n <= 8: start from a lexicographically maximal initialization
  // with w(T*_i) <= 2 alpha lb(T*_i), connect with cycles of weight
  // <= alpha lb(T*_j), never reinitialize, and assert the 5 alpha bound.
  bool exhaustive_init = false;
};

struct InitSubtour {
  EdgeMultiset edges;
  VertexSet vertices;
};

using TraceSink = std::function<void(const nlohmann::json&)>;

// Initial subtours T*_1..T*_k next to the backbone T*_0 = B.
class MergeState {
 public:
  MergeState(const Instance& inst, Subtour backbone, MergeParams params);

  const Instance& instance() const { return *inst_; }
  const Subtour& backbone() const { return backbone_; }
  const MergeParams& params() const { return params_; }
  const std::vector<InitSubtour>& inits() const { return inits_; }
  // Sorts by lb_eps descending (stable) unless `keep_order`. Asserts that the
  // subtours are disjoint from each other and from B, and I2' (or the 2 alpha
  // bound in exhaustive mode).
  void set_inits(std::vector<InitSubtour> inits, bool keep_order = false);

  Rational lb_bbar() const { return lb_bbar_; }
  // lb(T) + eps * |V(T)| / n * lb(B-bar).
  Rational lb_eps(const VertexSet& t) const;
  // Smallest i with V(T*_i) & t nonempty: 0 for B, 1..k for inits, else kLowInfinity.
  int low(const VertexSet& t) const;
  // lb_eps(T*_i); 0 for kLowInfinity.
  Rational init_lb_eps(int i) const;
  Rational potential() const;

  int reinits = 0;

 private:
  const Instance* inst_;
  Subtour backbone_;
  MergeParams params_;
  Rational lb_bbar_;
  std::vector<InitSubtour> inits_;
  std::vector<int> owner_;  // vertex -> low index
};

// New initialization after lb(F_r^i) > 3 lb_eps(T*_i). Case i = infinity
// appends the subtour of `fri` with the largest lb_eps. Case i finite merges
// T*_i, `fri` and the minimal prefix S of the other intersected inits sorted
// by lb_eps(T \ F) / lb_eps(T & F) descending. Asserts I1, I2' and the
// potential gain eps^2 / (3 n^2) lb(B-bar)^2.
std::vector<InitSubtour> reinitialize(const MergeState& state, int i, const std::vector<Subtour>& fri);

struct LightCycle {
  Subtour cycle;
  Rational weight;
};

// Cheapest cycle made of one edge (u,v) leaving t and a shortest v-u path,
// if its weight is <= bound. Ties go to the smallest leaving edge id.
std::optional<LightCycle> light_cycle_search(const Instance& inst, const VertexSet& t,
                                             const Rational& bound);

struct MergeResult {
  EdgeMultiset tour;
  Rational weight;
  Rational bound;  // 9(1+eps) alpha lb(B-bar) + beta + w(B), or 5 alpha ... in exhaustive mode
  int rounds = 0;  // merge rounds over all restarts
  int reinits = 0;
  Rational reinit_limit;  // 3 n^2 (1+eps)^2 / eps^2
  std::vector<InitSubtour> inits;  // initialization of the successful pass
};

// Merges B and oracle covers into a tour of inst. Returns B when V(B) = V.
// Throws OracleContractBreach when an oracle output is not a light cover.
MergeResult run_merge(const Instance& inst, const Subtour& backbone, const SpcOracle& oracle,
                      const MergeParams& params, const TraceSink& trace = nullptr);

// Lexicographically maximal disjoint initialization (sorted by lb) among
// subtours avoiding B with w <= 2 alpha lb. n <= 8.
std::vector<InitSubtour> exhaustive_initialization(const Instance& inst, const VertexSet& backbone_vertices,
                                                   const Rational& alpha);

}  // namespace atsp
