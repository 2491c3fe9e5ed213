#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "atsp/graph.hpp"
#include "atsp/instance.hpp"
#include "atsp/merge.hpp"

namespace atsp {

// delta and epsilon plus the constants derived from them:
//   nu = 18 + eps (singleton instances), kappa = 2, eta = 37 + 36 eps
//   (vertebrate pairs), rho = (kappa + eta (1 - delta) + nu + 3) / (2 delta - 1)
//   (irreducible instances), ratio = 2 rho / (1 - delta) (end to end).
struct SolverConfig {
  Rational delta = make_rational(78, 100);
  Rational epsilon = make_rational(1, 4);
  TraceSink trace;  // merge-engine events, tagged with the calling stage

  // Throws SolveError unless 1/2 < delta < 1 and 0 < epsilon.
  void validate() const;
  Rational nu() const;
  Rational kappa() const;
  Rational eta() const;
  Rational rho() const;
  Rational ratio() const;
};

struct MergeRunStats {
  std::string stage;  // "singleton" or "vertebrate"
  int n = 0;
  int rounds = 0;
  int reinits = 0;
  Rational reinit_limit;
  Rational weight;
  Rational bound;
  // Inputs of the run, so the bounds can be recomputed independently.
  Rational alpha;
  Rational beta;
  Rational epsilon;
  Rational lb_bbar;
  Rational backbone_weight;
};

struct PipelineStats {
  int lam_levels = 0;       // reducible sets contracted by a_lam
  int irr_calls = 0;        // a_irr invocations, top-level ones included
  int irr_recursive = 0;    // a_irr calls made from inside a_irr
  int max_depth = 0;        // deepest nesting of a_lam / a_irr frames
  int laminar_nonsingleton = 0;  // |L>=2| of the top-level instance
  long lp_pivots = 0;
  int lp_rounds = 0;
  std::vector<MergeRunStats> merges;
};

struct SolveReport {
  EdgeMultiset tour;  // edges of the input digraph
  std::vector<int> walk;
  Rational weight;
  Rational hk_value;
  Rational ratio;  // weight / hk_value; 1 when both are 0
  Rational bound;  // cfg.ratio()
  PipelineStats stats;
};

// End-to-end approximation. n = 1 yields the empty tour and n = 2 the two
// cheapest opposite edges; otherwise Held-Karp, laminar dual, a_lam. The
// tour is checked with verify_tour and weight <= ratio * HK is asserted.
// Throws SolveError when g is not strongly connected.
SolveReport approx_atsp(const Digraph& g, const EdgeValues& w, const SolverConfig& cfg = {});

// Tour of a laminarly-weighted instance with cost <= ratio * value, by
// contracting minimal reducible sets (the largest reducible id is minimal,
// since children have larger ids than their parents).
EdgeMultiset a_lam(const Instance& inst, const SolverConfig& cfg, PipelineStats* stats = nullptr);

// Tour of an irreducible instance with cost <= rho * value. Throws SolveError
// when some stored set is reducible.
EdgeMultiset a_irr(const Instance& inst, const SolverConfig& cfg, PipelineStats* stats = nullptr);

// Tour of a vertebrate pair with cost <= 2 value + eta lb(B-bar) + w(B). An
// empty backbone needs a singleton instance and gets cost <= nu * value.
EdgeMultiset a_ver(const Instance& inst, const Subtour& backbone, const SolverConfig& cfg,
                   PipelineStats* stats = nullptr);

struct QuasiBackbone {
  Subtour backbone;
  Subtour lifted;  // lift of the singleton tour, before rerouting
  std::vector<int> rerouted;  // ids of the maximal sets whose first visit was replaced
};

// Subtour visiting every maximal non-singleton set with
//   cost <= (nu + 3) value  and  2 sum_{S unvisited} y_S <= (1 - delta) value,
// both asserted. Throws SolveError when the second fails because the
// instance is not irreducible.
QuasiBackbone quasi_backbone(const Instance& inst, const SolverConfig& cfg, PipelineStats* stats = nullptr);

struct BruteForceResult {
  Rational weight;
  Subtour tour;
};

// Exact optimum by subset DP on the shortest-path closure. n <= 10. Throws
// SolveError when n is larger or g is not strongly connected.
BruteForceResult brute_force_atsp(const Digraph& g, const EdgeValues& w);

// Failed checks among "Eulerian", "connected", "coverage"; empty means t is a
// closed walk visiting every vertex.
std::vector<std::string> verify_tour(const Digraph& g, const EdgeMultiset& t);

nlohmann::json report_to_json(const SolveReport& r);

}  // namespace atsp
