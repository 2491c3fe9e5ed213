#include "atsp/merge.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "atsp/laminar_ops.hpp"

namespace atsp {

namespace {

// Component id per vertex of (V, f); isolated vertices are their own component.
std::vector<int> component_ids(const Digraph& g, const EdgeMultiset& f, int* count) {
  const int n = g.num_vertices();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& [e, c] : f.counts()) parent[find(g.edge(e).tail)] = find(g.edge(e).head);
  std::vector<int> id(n, -1), root_id(n, -1);
  int next = 0;
  for (int v = 0; v < n; ++v) {
    int r = find(v);
    if (root_id[r] < 0) root_id[r] = next++;
    id[v] = root_id[r];
  }
  if (count) *count = next;
  return id;
}

std::vector<VertexSet> components(const Digraph& g, const EdgeMultiset& f) {
  int count = 0;
  std::vector<int> id = component_ids(g, f, &count);
  std::vector<VertexSet> out(count);
  for (int v = 0; v < g.num_vertices(); ++v) out[id[v]].push_back(v);
  return out;  // ordered by smallest vertex
}

EdgeMultiset edges_with_tail_in(const Digraph& g, const EdgeMultiset& f, const std::vector<char>& in) {
  EdgeMultiset out;
  for (const auto& [e, c] : f.counts()) {
    if (in[g.edge(e).tail]) out.add(e, c);
  }
  return out;
}

std::string low_label(int i) { return i == kLowInfinity ? "inf" : std::to_string(i); }

nlohmann::json low_json(int i) {
  if (i == kLowInfinity) return "inf";
  return i;
}

}  // namespace

MergeState::MergeState(const Instance& inst, Subtour backbone, MergeParams params)
    : inst_(&inst), backbone_(std::move(backbone)), params_(std::move(params)) {
  lb_bbar_ = lb_bar(inst, backbone_.vertices);
  owner_.assign(inst.num_vertices(), kLowInfinity);
  for (int v : backbone_.vertices) owner_.at(v) = 0;
}

void MergeState::set_inits(std::vector<InitSubtour> inits, bool keep_order) {
  const Digraph& g = inst_->graph();
  if (!keep_order) {
    std::stable_sort(inits.begin(), inits.end(), [&](const InitSubtour& a, const InitSubtour& b) {
      return lb_eps(a.vertices) > lb_eps(b.vertices);
    });
  }
  owner_.assign(inst_->num_vertices(), kLowInfinity);
  for (int v : backbone_.vertices) owner_[v] = 0;
  for (std::size_t i = 0; i < inits.size(); ++i) {
    const InitSubtour& t = inits[i];
    ATSP_CHECK(!t.edges.empty(), "empty initial subtour");
    ATSP_CHECK(eulerian_components(g, t.edges).size() == 1, "initial subtour not a connected Eulerian set");
    ATSP_CHECK(multiset_vertices(g, t.edges) == t.vertices, "initial subtour vertex list stale");
    for (int v : t.vertices) {
      ATSP_CHECK(owner_[v] == kLowInfinity, "initial subtours not disjoint (I1)");
      owner_[v] = static_cast<int>(i) + 1;
    }
    Rational w = cost(*inst_, t.edges);
    if (params_.exhaustive_init) {
      ATSP_CHECK(w <= 2 * params_.alpha * lb_set(*inst_, t.vertices), "initial subtour breaks w <= 2 alpha lb");
    } else {
      ATSP_CHECK(w <= 3 * params_.alpha * lb_eps(t.vertices), "initial subtour breaks I2'");
    }
  }
  inits_ = std::move(inits);
}

Rational MergeState::lb_eps(const VertexSet& t) const {
  Rational n = inst_->num_vertices();
  return lb_set(*inst_, t) + params_.epsilon * Rational(static_cast<long>(t.size())) / n * lb_bbar_;
}

int MergeState::low(const VertexSet& t) const {
  int best = kLowInfinity;
  for (int v : t) best = std::min(best, owner_.at(v));
  return best;
}

Rational MergeState::init_lb_eps(int i) const {
  if (i == kLowInfinity) return 0;
  ATSP_CHECK(i >= 1 && i <= static_cast<int>(inits_.size()), "init index out of range");
  return lb_eps(inits_[i - 1].vertices);
}

Rational MergeState::potential() const {
  Rational total = 0;
  for (const InitSubtour& t : inits_) {
    Rational l = lb_eps(t.vertices);
    total += l * l;
  }
  return total;
}

std::vector<InitSubtour> reinitialize(const MergeState& state, int i, const std::vector<Subtour>& fri) {
  const Instance& inst = state.instance();
  const Digraph& g = inst.graph();
  const MergeParams& p = state.params();
  const std::vector<InitSubtour>& old = state.inits();
  ATSP_CHECK(!fri.empty(), "reinitialize without offending subtours");
  VertexSet fv;
  Rational lb_f = 0;
  for (const Subtour& t : fri) {
    fv = set_union(fv, t.vertices);
    lb_f += lb_set(inst, t.vertices);
  }
  ATSP_CHECK(lb_f > 3 * state.init_lb_eps(i), "reinitialize called without a violation");

  std::vector<InitSubtour> next;
  if (i == kLowInfinity) {
    const Subtour* pick = &fri[0];
    for (const Subtour& t : fri) {
      if (state.lb_eps(t.vertices) > state.lb_eps(pick->vertices)) pick = &t;
    }
    ATSP_CHECK(state.low(pick->vertices) == kLowInfinity, "case infinity subtour meets an init");
    next = old;
    next.push_back({pick->edges, pick->vertices});
  } else {
    std::vector<int> in_i;  // 1-based indices of inits meeting F
    for (std::size_t j = 0; j < old.size(); ++j) {
      if (intersects(old[j].vertices, fv)) in_i.push_back(static_cast<int>(j) + 1);
    }
    ATSP_CHECK(std::find(in_i.begin(), in_i.end(), i) != in_i.end(), "T*_i does not meet F_r^i");
    ATSP_CHECK(in_i.front() == i, "F_r^i meets an init of smaller index");
    std::vector<int> others;
    std::vector<Rational> outside(old.size() + 1), inside(old.size() + 1);
    for (int j : in_i) {
      outside[j] = state.lb_eps(set_difference(old[j - 1].vertices, fv));
      inside[j] = state.lb_eps(set_intersection(old[j - 1].vertices, fv));
      if (j != i) others.push_back(j);
    }
    for (int j : others) ATSP_CHECK(sgn(inside[j]) > 0, "zero lb_eps overlap");
    std::stable_sort(others.begin(), others.end(), [&](int a, int b) {
      return outside[a] * inside[b] > outside[b] * inside[a];
    });
    Rational target = -state.lb_eps(old[i - 1].vertices);
    for (int j : others) target += outside[j] / 3;
    std::vector<int> prefix;
    Rational acc = 0;
    for (int j : others) {
      if (acc >= target) break;
      acc += outside[j];
      prefix.push_back(j);
    }
    ATSP_CHECK(acc >= target, "no prefix reaches the target");
    InitSubtour merged{old[i - 1].edges, old[i - 1].vertices};
    for (const Subtour& t : fri) merged.edges.add(t.edges);
    for (int j : prefix) merged.edges.add(old[j - 1].edges);
    merged.vertices = multiset_vertices(g, merged.edges);
    next.push_back(std::move(merged));
    for (std::size_t j = 0; j < old.size(); ++j) {
      if (std::find(in_i.begin(), in_i.end(), static_cast<int>(j) + 1) == in_i.end()) next.push_back(old[j]);
    }
  }
  const InitSubtour& fresh = i == kLowInfinity ? next.back() : next.front();
  ATSP_CHECK(cost(inst, fresh.edges) <= 3 * p.alpha * state.lb_eps(fresh.vertices),
             "reinitialized subtour breaks I2'");
  Rational after = 0;
  for (const InitSubtour& t : next) {
    Rational l = state.lb_eps(t.vertices);
    after += l * l;
  }
  Rational n = inst.num_vertices();
  ATSP_CHECK(after - state.potential() >=
                 p.epsilon * p.epsilon / (3 * n * n) * state.lb_bbar() * state.lb_bbar(),
             "reinitialization potential gain too small");
  return next;
}

std::optional<LightCycle> light_cycle_search(const Instance& inst, const VertexSet& t,
                                             const Rational& bound) {
  const Digraph& g = inst.graph();
  const int n = g.num_vertices();
  auto in = membership(n, t);
  const VertexSet all = all_vertices(n);
  std::map<int, std::vector<std::optional<Rational>>> from;  // head -> distances
  std::optional<Rational> best;
  int best_edge = -1;
  for (const Edge& e : g.edges()) {
    if (!in[e.tail] || in[e.head]) continue;
    auto it = from.find(e.head);
    if (it == from.end()) it = from.emplace(e.head, shortest_distances(g, inst.weights(), e.head, all)).first;
    const auto& d = it->second[e.tail];
    if (!d) continue;
    Rational c = inst.weights()[e.id] + *d;
    if (!best || c < *best) {
      best = c;
      best_edge = e.id;
    }
  }
  if (!best || *best > bound) return std::nullopt;
  const Edge& e = g.edge(best_edge);
  auto back = shortest_path(g, inst.weights(), e.head, e.tail, all);
  ATSP_CHECK(back && inst.weights()[e.id] + back->weight == *best, "light cycle path mismatch");
  LightCycle out;
  out.weight = *best;
  out.cycle.walk.push_back(e.id);
  out.cycle.walk.insert(out.cycle.walk.end(), back->edges.begin(), back->edges.end());
  for (int x : out.cycle.walk) out.cycle.edges.add(x);
  out.cycle.vertices = multiset_vertices(g, out.cycle.edges);
  return out;
}

std::vector<InitSubtour> exhaustive_initialization(const Instance& inst, const VertexSet& backbone_vertices,
                                                   const Rational& alpha) {
  const Digraph& g = inst.graph();
  const int n = g.num_vertices();
  ATSP_CHECK(n <= 8, "exhaustive initialization is limited to n <= 8");
  int avail = (1 << n) - 1;
  for (int v : backbone_vertices) avail &= ~(1 << v);
  auto to_set = [n](int mask) {
    VertexSet s;
    for (int v = 0; v < n; ++v) {
      if (mask >> v & 1) s.push_back(v);
    }
    return s;
  };
  std::map<int, Subtour> feasible;
  std::map<int, Rational> lbs;
  for (int mask = avail; mask > 0; mask = (mask - 1) & avail) {
    if (__builtin_popcount(mask) < 2) continue;
    VertexSet u = to_set(mask);
    auto walk = min_closed_walk(g, inst.weights(), u);
    if (!walk) continue;
    Rational l = lb_set(inst, u);
    if (multiset_cost(walk->edges, inst.weights()) <= 2 * alpha * l) {
      feasible.emplace(mask, std::move(*walk));
      lbs.emplace(mask, l);
    }
  }
  struct Best {
    std::vector<Rational> seq;  // lb values, descending
    std::vector<int> sets;      // parallel masks
  };
  auto better = [](const std::vector<Rational>& a, const std::vector<Rational>& b) {
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
      if (a[i] != b[i]) return a[i] > b[i];
    }
    return a.size() > b.size();
  };
  std::map<int, Best> memo;
  std::function<const Best&(int)> solve = [&](int r) -> const Best& {
    auto it = memo.find(r);
    if (it != memo.end()) return it->second;
    Best best;
    for (int u = r; u > 0; u = (u - 1) & r) {
      auto f = feasible.find(u);
      if (f == feasible.end()) continue;
      Best cand = solve(r & ~u);
      std::size_t pos = 0;
      while (pos < cand.seq.size() && cand.seq[pos] >= lbs[u]) ++pos;
      cand.seq.insert(cand.seq.begin() + pos, lbs[u]);
      cand.sets.insert(cand.sets.begin() + pos, u);
      if (better(cand.seq, best.seq)) best = std::move(cand);
    }
    return memo.emplace(r, std::move(best)).first->second;
  };
  std::vector<InitSubtour> out;
  for (int mask : solve(avail).sets) {
    const Subtour& s = feasible.at(mask);
    out.push_back({s.edges, s.vertices});
  }
  return out;
}

namespace {

struct PassOutcome {
  std::optional<EdgeMultiset> tour;
  int violated = 0;
  std::vector<Subtour> offending;
};

PassOutcome merge_pass(const MergeState& state, const SpcOracle& oracle, int pass, int& rounds,
                       const TraceSink& trace) {
  const Instance& inst = state.instance();
  const Digraph& g = inst.graph();
  const int n = g.num_vertices();
  const MergeParams& p = state.params();
  const VertexSet& bv = state.backbone().vertices;

  EdgeMultiset tstar = state.backbone().edges;
  for (const InitSubtour& t : state.inits()) tstar.add(t.edges);
  std::set<int> f_seen;       // inits i with F_r^i nonempty in an earlier round
  std::map<int, int> marks;   // positive-weight kept cycles marked by j
  int comps = 0;
  component_ids(g, tstar, &comps);

  for (int round = 0;; ++round) {
    if (comps == 1) return {tstar, 0, {}};
    ++rounds;
    std::vector<VertexSet> partition;
    for (VertexSet& c : components(g, tstar)) {
      if (!intersects(c, bv)) partition.push_back(std::move(c));
    }
    EdgeMultiset f = oracle(inst, state.backbone(), partition);
    if (!degree_imbalance(g, f).empty()) throw OracleContractBreach("output not Eulerian", std::nullopt);
    if (!uncovered_classes(g, f, partition).empty()) {
      throw OracleContractBreach("a partition class is not crossed", std::nullopt);
    }
    LightnessCheck light = check_lightness(inst, bv, f, p.alpha, p.beta);
    if (!light.ok) throw OracleContractBreach(light.reason, light.offending);

    // Drop oracle subtours inside a single subtour of T*.
    std::vector<int> tcomp = component_ids(g, tstar, nullptr);
    std::vector<Subtour> kept;
    EdgeMultiset fkept;
    int discarded = 0;
    for (Subtour& t : eulerian_components(g, f)) {
      bool inside = std::all_of(t.vertices.begin(), t.vertices.end(),
                                [&](int v) { return tcomp[v] == tcomp[t.vertices.front()]; });
      if (inside) {
        ++discarded;
        continue;
      }
      fkept.add(t.edges);
      kept.push_back(std::move(t));
    }

    // Update phase.
    EdgeMultiset x;
    struct Added {
      LightCycle c;
      int mark;
    };
    std::vector<Added> added;
    VertexSet chosen;
    int chosen_low = kLowInfinity;
    while (true) {
      EdgeMultiset h = tstar;
      h.add(fkept);
      h.add(x);
      std::vector<VertexSet> hc = components(g, h);
      int best = -1;
      Rational best_lb;
      int best_low = -1;
      for (std::size_t c = 0; c < hc.size(); ++c) {
        int l = state.low(hc[c]);
        Rational lbc = lb_set(inst, hc[c]);
        if (best < 0 || l > best_low || (l == best_low && lbc > best_lb)) {
          best = static_cast<int>(c);
          best_low = l;
          best_lb = lbc;
        }
      }
      chosen = hc[best];
      chosen_low = best_low;
      if (static_cast<int>(chosen.size()) == n) break;
      ATSP_CHECK(chosen_low != 0, "selected component meets B before the final round");
      Rational bound = 0;
      if (chosen_low != kLowInfinity) {
        bound = p.exhaustive_init ? Rational(p.alpha * lb_set(inst, state.inits()[chosen_low - 1].vertices))
                                  : Rational(3 * p.alpha * state.init_lb_eps(chosen_low));
      }
      auto cyc = light_cycle_search(inst, chosen, bound);
      if (!cyc) break;
      x.add(cyc->cycle.edges);
      added.push_back({std::move(*cyc), chosen_low});
    }

    auto in_t = membership(n, chosen);
    ATSP_CHECK(!intersects(chosen, bv) || static_cast<int>(chosen.size()) == n,
               "B merged before the final round");

    // Relaxed condition on F_r^i = kept oracle subtours inside T, grouped by low.
    std::map<int, std::vector<Subtour>> by_low;
    for (const Subtour& t : kept) {
      if (in_t[t.vertices.front()]) by_low[state.low(t.vertices)].push_back(t);
    }
    if (!p.exhaustive_init) {
      for (auto& [i, group] : by_low) {
        if (i == 0) continue;
        Rational l = 0;
        for (const Subtour& t : group) l += lb_set(inst, t.vertices);
        if (l > 3 * state.init_lb_eps(i)) {
          if (trace) {
            trace({{"event", "violation"}, {"pass", pass}, {"round", round}, {"index", low_json(i)},
                   {"lb", to_string(l)}, {"limit", to_string(3 * state.init_lb_eps(i))}});
          }
          return {std::nullopt, i, std::move(group)};
        }
      }
    }
    for (const auto& [i, group] : by_low) {
      if (i == 0 || i == kLowInfinity) continue;
      ATSP_CHECK(f_seen.insert(i).second, "F_r^" + std::to_string(i) + " nonempty in two rounds");
    }
    nlohmann::json cycles = nlohmann::json::array();
    for (const Added& a : added) {
      bool kept_cycle = in_t[a.c.cycle.vertices.front()];
      if (kept_cycle && sgn(a.c.weight) > 0) {
        ATSP_CHECK(a.mark != kLowInfinity, "positive cycle marked by infinity");
        ATSP_CHECK(++marks[a.mark] == 1, "two kept cycles marked by " + low_label(a.mark));
      }
      cycles.push_back({{"weight", to_string(a.c.weight)}, {"mark", low_json(a.mark)}, {"kept", kept_cycle}});
    }
    tstar.add(edges_with_tail_in(g, fkept, in_t));
    tstar.add(edges_with_tail_in(g, x, in_t));
    int after = 0;
    component_ids(g, tstar, &after);
    ATSP_CHECK(after < comps, "update phase did not merge components");
    if (trace) {
      nlohmann::json part = nlohmann::json::array();
      for (const VertexSet& c : partition) part.push_back(c);
      trace({{"event", "round"}, {"pass", pass}, {"round", round}, {"partition", part},
             {"oracle", {{"edges", f.size()}, {"weight", to_string(cost(inst, f))},
                         {"subtours", kept.size() + discarded}, {"discarded", discarded}}},
             {"cycles", cycles}, {"selected_low", low_json(chosen_low)}, {"components", after}});
    }
    comps = after;
  }
}

}  // namespace

MergeResult run_merge(const Instance& inst, const Subtour& backbone, const SpcOracle& oracle,
                      const MergeParams& params, const TraceSink& trace) {
  const Digraph& g = inst.graph();
  const int n = g.num_vertices();
  if (sgn(params.epsilon) <= 0) throw SolveError("merge: epsilon must be positive");
  if (sgn(params.alpha) < 0 || sgn(params.beta) < 0) throw SolveError("merge: alpha and beta must be nonnegative");
  Subtour b = backbone;
  if (!b.edges.empty()) {
    if (eulerian_components(g, b.edges).size() != 1) throw SolveError("merge: backbone is not a subtour");
    b.vertices = multiset_vertices(g, b.edges);
  }
  MergeResult res;
  Rational eps = params.epsilon;
  res.reinit_limit = 3 * Rational(n) * Rational(n) * (1 + eps) * (1 + eps) / (eps * eps);
  Rational wb = cost(inst, b.edges);
  Rational lbb = lb_bar(inst, b.vertices);
  res.bound = params.exhaustive_init ? Rational(5 * params.alpha * lbb + params.beta + wb)
                                     : Rational(9 * (1 + eps) * params.alpha * lbb + params.beta + wb);
  if (static_cast<int>(b.vertices.size()) == n) {
    res.tour = b.edges;
    res.weight = wb;
    if (trace) trace({{"event", "done"}, {"weight", to_string(res.weight)}, {"bound", to_string(res.bound)}});
    return res;
  }
  MergeState state(inst, b, params);
  if (params.exhaustive_init) state.set_inits(exhaustive_initialization(inst, b.vertices, params.alpha), true);
  for (int pass = 0;; ++pass) {
    PassOutcome out = merge_pass(state, oracle, pass, res.rounds, trace);
    if (out.tour) {
      res.tour = std::move(*out.tour);
      break;
    }
    ATSP_CHECK(!params.exhaustive_init, "exhaustive mode never reinitializes");
    Rational before = state.potential();
    state.set_inits(reinitialize(state, out.violated, out.offending));
    ++state.reinits;
    ATSP_CHECK(Rational(state.reinits) <= res.reinit_limit, "reinitialization count exceeds 3n^2(1+eps)^2/eps^2");
    if (trace) {
      trace({{"event", "reinit"}, {"case", low_json(out.violated)}, {"count", state.reinits},
             {"potential_before", to_string(before)}, {"potential_after", to_string(state.potential())}});
    }
  }
  res.reinits = state.reinits;
  res.inits = state.inits();
  res.weight = cost(inst, res.tour);
  ATSP_CHECK(is_tour(g, res.tour), "merge output is not a tour");
  ATSP_CHECK(res.weight <= res.bound, "merge weight exceeds its guarantee");
  if (trace) trace({{"event", "done"}, {"weight", to_string(res.weight)}, {"bound", to_string(res.bound)}});
  return res;
}

}  // namespace atsp
