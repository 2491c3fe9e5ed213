#include "atsp/pipeline.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include "atsp/errors.hpp"
#include "atsp/heldkarp.hpp"
#include "atsp/laminar_ops.hpp"
#include "atsp/spc_singleton.hpp"
#include "atsp/vertebrate.hpp"

namespace atsp {

void SolverConfig::validate() const {
  if (!(delta > make_rational(1, 2) && delta < 1)) throw SolveError("config: delta must lie in (1/2, 1)");
  if (sgn(epsilon) <= 0) throw SolveError("config: epsilon must be positive");
}

Rational SolverConfig::nu() const { return Rational(18 + epsilon); }
Rational SolverConfig::kappa() const { return Rational(2); }
Rational SolverConfig::eta() const { return Rational(37 + 36 * epsilon); }
Rational SolverConfig::rho() const {
  return Rational((kappa() + eta() * (1 - delta) + nu() + 3) / (2 * delta - 1));
}
Rational SolverConfig::ratio() const { return Rational(2 * rho() / (1 - delta)); }

namespace {

struct Ctx {
  const SolverConfig& cfg;
  PipelineStats& stats;
  int depth = 0;
};

// Prefixes internal failures with the stage they surfaced in.
template <class F>
auto staged(const char* name, F&& f) {
  try {
    return f();
  } catch (const InvariantViolation& e) {
    throw InvariantViolation(std::string(name) + ": " + e.what());
  }
}

struct DepthGuard {
  Ctx& ctx;
  explicit DepthGuard(Ctx& c) : ctx(c) {
    ++ctx.depth;
    ctx.stats.max_depth = std::max(ctx.stats.max_depth, ctx.depth);
  }
  ~DepthGuard() { --ctx.depth; }
};

int count_nonsingleton(const Instance& inst) {
  int k = 0;
  for (const LaminarSet& s : inst.laminar().sets()) k += s.vertices.size() >= 2;
  return k;
}

Rational sum_lb_bound(const Instance& inst, const VertexSet& backbone_vertices) {
  // 2 * sum of y_S over stored sets missing the backbone.
  Rational s = 0;
  for (const LaminarSet& ls : inst.laminar().sets()) {
    if (!intersects(ls.vertices, backbone_vertices)) s += 2 * ls.y;
  }
  return s;
}

Subtour as_subtour(const Digraph& g, const EdgeMultiset& f) {
  if (f.empty()) return {};
  auto comps = eulerian_components(g, f);
  ATSP_CHECK(comps.size() == 1, "expected a single subtour");
  return comps[0];
}

// Disjoint laminar sets of the base instance contracted one after another.
struct ContractChain {
  std::vector<Instance> levels;  // levels[0] is the base
  std::vector<ContractionRecord> recs;
  std::vector<int> vmap;  // base vertex -> vertex of levels.back()
  std::vector<int> emap;  // base edge -> edge of levels.back(), -1 if dropped

  const Instance& top() const { return levels.back(); }
};

ContractChain contract_all(const Instance& inst, const std::vector<VertexSet>& sets) {
  ContractChain c;
  c.levels.push_back(inst);
  c.vmap.resize(inst.num_vertices());
  std::iota(c.vmap.begin(), c.vmap.end(), 0);
  c.emap.resize(inst.graph().num_edges());
  std::iota(c.emap.begin(), c.emap.end(), 0);
  for (const VertexSet& s : sets) {
    VertexSet image;
    for (int v : s) image.push_back(c.vmap[v]);
    std::sort(image.begin(), image.end());
    auto [child, rec] = contract(c.levels.back(), image);
    for (int& v : c.vmap) v = rec.vertex_map[v];
    for (int& e : c.emap) {
      if (e >= 0) e = rec.edge_map[e];
    }
    c.levels.push_back(std::move(child));
    c.recs.push_back(std::move(rec));
  }
  return c;
}

EdgeMultiset lift_chain(const ContractChain& c, EdgeMultiset f) {
  for (int k = static_cast<int>(c.recs.size()) - 1; k >= 0; --k) {
    f = lift_subtour(c.levels[k], c.levels[k + 1], c.recs[k], f).edges;
  }
  return f;
}

void check_irreducible(const Instance& inst, const Rational& delta) {
  for (const LaminarSet& s : inst.laminar().sets()) {
    if (is_reducible(inst, s.vertices, delta)) {
      throw SolveError("a_irr: instance has a reducible set");
    }
  }
}

TraceSink tagged(const Ctx& ctx, const char* stage) {
  if (!ctx.cfg.trace) return nullptr;
  TraceSink sink = ctx.cfg.trace;
  std::string tag = stage;
  return [sink, tag](const nlohmann::json& ev) {
    nlohmann::json e = ev;
    e["stage"] = tag;
    sink(e);
  };
}

EdgeMultiset a_ver_impl(const Instance& inst, const Subtour& backbone, Ctx& ctx) {
  const int n = inst.num_vertices();
  const Rational total = total_value(inst);
  if (static_cast<int>(backbone.vertices.size()) == n && (n == 1 || !backbone.edges.empty())) {
    return backbone.edges;
  }
  MergeRunStats run;
  run.n = n;
  MergeResult r;
  if (backbone.edges.empty()) {
    if (!is_singleton(inst)) throw SolveError("a_ver: empty backbone needs a singleton instance");
    // 9 (1 + eps') * 2 * lb(V) = (18 + eps) value with eps' = eps / 18.
    MergeParams p;
    p.alpha = 2;
    p.beta = 0;
    p.epsilon = ctx.cfg.epsilon / 18;
    SpcOracle oracle = [](const Instance& i, const Subtour&, const std::vector<VertexSet>& part) {
      return solve_spc_singleton(i, part);
    };
    r = run_merge(inst, {}, oracle, p, tagged(ctx, "singleton"));
    run.stage = "singleton";
    run.alpha = p.alpha;
    run.beta = p.beta;
    run.epsilon = p.epsilon;
    run.lb_bbar = lb_bar(inst, {});
    ATSP_CHECK(r.weight <= ctx.cfg.nu() * total, "singleton tour exceeds nu * value");
  } else {
    const Rational lbb = lb_bar(inst, backbone.vertices);
    const Rational wb = cost(inst, backbone.edges);
    MergeParams p;
    p.alpha = 4;
    p.beta = 2 * total + lbb;
    p.epsilon = ctx.cfg.epsilon;
    SpcOracle oracle = [](const Instance& i, const Subtour& b, const std::vector<VertexSet>& part) {
      return solve_spc_vertebrate(i, b, part);
    };
    r = run_merge(inst, backbone, oracle, p, tagged(ctx, "vertebrate"));
    run.stage = "vertebrate";
    run.alpha = p.alpha;
    run.beta = p.beta;
    run.epsilon = p.epsilon;
    run.lb_bbar = lbb;
    run.backbone_weight = wb;
    // 9 (1 + eps) 4 lb(B-bar) + 2 value + lb(B-bar) + w(B).
    ATSP_CHECK(r.weight <= 2 * total + ctx.cfg.eta() * lbb + wb,
               "vertebrate tour exceeds 2 value + eta lb(B-bar) + w(B)");
  }
  ATSP_CHECK(r.weight <= r.bound, "merge weight above its bound");
  ATSP_CHECK(is_tour(inst.graph(), r.tour), "merge output is not a tour");
  run.rounds = r.rounds;
  run.reinits = r.reinits;
  run.reinit_limit = r.reinit_limit;
  run.weight = r.weight;
  run.bound = r.bound;
  ctx.stats.merges.push_back(std::move(run));
  return r.tour;
}

QuasiBackbone quasi_backbone_impl(const Instance& inst, Ctx& ctx) {
  const Digraph& g = inst.graph();
  const LaminarForest& lam = inst.laminar();
  const Rational total = total_value(inst);
  const Rational delta = ctx.cfg.delta;

  std::vector<int> maxima;
  std::vector<VertexSet> max_sets;
  for (int id : lam.roots()) {
    if (lam.set(id).vertices.size() >= 2) {
      maxima.push_back(id);
      max_sets.push_back(lam.set(id).vertices);
    }
  }
  ContractChain chain = contract_all(inst, max_sets);
  const Instance& top = chain.top();
  ATSP_CHECK(is_singleton(top), "contracting the maximal sets left a non-singleton set");
  ATSP_CHECK(total_value(top) <= total, "contraction increased the value");
  EdgeMultiset t = a_ver_impl(top, {}, ctx);
  const Rational t_cost = cost(top, t);
  ATSP_CHECK(t_cost <= ctx.cfg.nu() * total_value(top), "singleton tour above nu * value");

  QuasiBackbone qb;
  qb.lifted = as_subtour(g, lift_chain(chain, t));
  ATSP_CHECK(cost(inst, qb.lifted.edges) <= t_cost, "lift costs more than the singleton tour");

  std::vector<int> top_of(inst.num_vertices(), -1);
  for (int id : maxima) {
    for (int v : lam.set(id).vertices) top_of[v] = id;
  }
  const std::vector<int>& walk = qb.lifted.walk;
  if (!maxima.empty()) {
    // The walk is cyclic; a visit may wrap past its end. Only the multiset
    // matters, so segments are dropped by index and the detours added.
    const std::size_t len = walk.size();
    std::vector<char> dropped(len, 0);
    std::vector<char> done(lam.size(), 0);
    EdgeMultiset f;
    Rational added = 0;
    for (std::size_t k = 0; k < len; ++k) {
      const Edge& e = g.edge(walk[k]);
      const int id = top_of[e.head];
      if (id < 0 || id == top_of[e.tail] || done[id]) continue;
      done[id] = 1;
      const VertexSet& s = lam.set(id).vertices;
      std::size_t j = (k + 1) % len;
      while (top_of[g.edge(walk[j]).head] == id) {
        ATSP_CHECK(j != k, "visit does not leave its set");
        dropped[j] = 1;
        j = (j + 1) % len;
      }
      const int u = e.head;
      const int v = g.edge(walk[j]).tail;
      const MaxDS md = max_DS(inst, s);
      const Rational vs = value(inst, s);
      auto p1 = shortest_path(g, inst.weights(), u, md.u, s);
      ATSP_CHECK(p1.has_value(), "max entry unreachable inside S");
      const ShortPathResult p2 = short_path(inst, s, md.u, md.v);
      auto p3 = shortest_path(g, inst.weights(), md.v, v, s);
      ATSP_CHECK(p3.has_value(), "exit unreachable inside S");
      ATSP_CHECK(p1->weight <= vs && p2.path.weight <= vs && p3->weight <= vs,
                 "rerouting path heavier than value(S)");
      for (int pe : p1->edges) f.add(pe);
      for (int pe : p2.path.edges) f.add(pe);
      for (int pe : p3->edges) f.add(pe);
      added += vs;
      qb.rerouted.push_back(id);
    }
    for (std::size_t k = 0; k < len; ++k) {
      if (!dropped[k]) f.add(walk[k]);
    }
    qb.backbone = as_subtour(g, f);
    ATSP_CHECK(cost(inst, qb.backbone.edges) <= cost(inst, qb.lifted.edges) + 3 * added,
               "rerouting added more than 3 value(S) per set");
  } else {
    qb.backbone = qb.lifted;
  }

  const VertexSet& vb = qb.backbone.vertices;
  ATSP_CHECK(cost(inst, qb.backbone.edges) <= (ctx.cfg.nu() + 3) * total, "quasi-backbone above (nu + 3) value");
  for (int id : maxima) {
    ATSP_CHECK(intersects(lam.set(id).vertices, vb), "quasi-backbone misses a maximal set");
    Rational missed = 0;
    for (const LaminarSet& r : lam.sets()) {
      if (r.vertices.size() < lam.set(id).vertices.size() && is_subset(r.vertices, lam.set(id).vertices) &&
          !intersects(r.vertices, vb)) {
        missed += 2 * r.y;
      }
    }
    if (missed > (1 - delta) * value(inst, lam.set(id).vertices)) {
      throw SolveError("quasi_backbone: irreducibility precondition violated");
    }
  }
  if (sum_lb_bound(inst, vb) > (1 - delta) * total) {
    throw SolveError("quasi_backbone: irreducibility precondition violated");
  }
  return qb;
}

// Returns the tour; `calls` receives the number of recursive a_irr calls made.
EdgeMultiset a_irr_impl(const Instance& inst, Ctx& ctx, int& calls) {
  DepthGuard guard(ctx);
  ++ctx.stats.irr_calls;
  calls = 0;
  const SolverConfig& cfg = ctx.cfg;
  const Digraph& g = inst.graph();
  const LaminarForest& lam = inst.laminar();
  const Rational total = total_value(inst);
  check_irreducible(inst, cfg.delta);

  const QuasiBackbone qb = quasi_backbone_impl(inst, ctx);
  const VertexSet& vb = qb.backbone.vertices;

  // Maximal non-singleton sets the quasi-backbone misses. B meets every
  // maximal set, so each of these has a parent.
  std::vector<VertexSet> unvisited;
  for (const LaminarSet& s : lam.sets()) {
    if (s.vertices.size() < 2 || intersects(s.vertices, vb)) continue;
    ATSP_CHECK(s.parent >= 0, "unvisited maximal set");
    if (intersects(lam.set(s.parent).vertices, vb)) unvisited.push_back(s.vertices);
  }

  EdgeMultiset fs_all;
  Rational fs_cost = 0;
  for (const VertexSet& s : unvisited) {
    auto [sub, rec] = induce(inst, s);
    ATSP_CHECK(total_value(sub) == 2 * value(inst, s), "value(I[S]) != 2 value(S)");
    int sub_calls = 0;
    const EdgeMultiset ts = a_irr_impl(sub, ctx, sub_calls);
    calls += 1 + sub_calls;
    ctx.stats.irr_recursive += 1;
    const Rational ts_cost = cost(sub, ts);
    ATSP_CHECK(ts_cost <= cfg.rho() * total_value(sub), "recursive tour above rho * value(I[S])");
    const ContractibleResult cr = make_contractible(inst, sub, rec, ts);
    ATSP_CHECK(cost(inst, cr.f) <= ts_cost, "F_S costs more than T_S");
    fs_cost += cost(inst, cr.f);
    fs_all.add(cr.f);
  }
  ATSP_CHECK(calls <= count_nonsingleton(inst), "a_irr recursion exceeds |L>=2|");
  ATSP_CHECK(fs_cost <= 2 * cfg.rho() * (1 - cfg.delta) * total, "F_S total above 2 rho (1 - delta) value");

  ContractChain chain = contract_all(inst, unvisited);
  const Instance& top = chain.top();
  EdgeMultiset bm;
  for (const auto& [e, c] : qb.backbone.edges.counts()) {
    ATSP_CHECK(chain.emap[e] >= 0, "backbone edge lost in contraction");
    bm.add(chain.emap[e], c);
  }
  const Subtour b = as_subtour(top.graph(), bm);
  for (const LaminarSet& s : top.laminar().sets()) {
    ATSP_CHECK(s.vertices.size() < 2 || intersects(s.vertices, b.vertices), "not a vertebrate pair");
  }
  const Rational top_value = total_value(top);
  const Rational wb = cost(top, b.edges);
  ATSP_CHECK(wb == cost(inst, qb.backbone.edges), "contraction changed w(B)");
  ATSP_CHECK(top_value <= total, "contraction increased the value");
  const Rational lbb = lb_bar(top, b.vertices);
  ATSP_CHECK(lbb <= sum_lb_bound(inst, vb), "lb(B-bar) above 2 y(L*)");

  const EdgeMultiset t_top = a_ver_impl(top, b, ctx);
  const Rational t_cost = cost(top, t_top);
  ATSP_CHECK(t_cost <= cfg.kappa() * top_value + cfg.eta() * lbb + wb, "a_ver bound");
  ATSP_CHECK(t_cost <= (cfg.kappa() + cfg.eta() * (1 - cfg.delta) + cfg.nu() + 3) * total,
             "vertebrate tour above (kappa + eta (1 - delta) + nu + 3) value");

  EdgeMultiset f = lift_chain(chain, t_top);
  ATSP_CHECK(cost(inst, f) <= t_cost, "lift costs more than T'");
  f.add(fs_all);
  ATSP_CHECK(is_tour(g, f), "a_irr output is not a tour");
  ATSP_CHECK(cost(inst, f) <= cfg.rho() * total, "a_irr tour above rho * value");
  return f;
}

// `steps` receives a_lam levels plus recursive a_irr calls below this frame.
EdgeMultiset a_lam_impl(const Instance& inst, Ctx& ctx, int& steps) {
  DepthGuard guard(ctx);
  steps = 0;
  const SolverConfig& cfg = ctx.cfg;
  const LaminarForest& lam = inst.laminar();
  const Rational total = total_value(inst);

  int chosen = -1;
  for (int id = lam.size() - 1; id >= 0 && chosen < 0; --id) {
    if (is_reducible(inst, lam.set(id).vertices, cfg.delta)) chosen = id;
  }
  if (chosen < 0) {
    int calls = 0;
    EdgeMultiset t = staged("a_irr", [&] { return a_irr_impl(inst, ctx, calls); });
    steps = calls;
    return t;
  }

  ++ctx.stats.lam_levels;
  const VertexSet& s = lam.set(chosen).vertices;
  const Rational vs = value(inst, s);
  auto [sub, srec] = induce(inst, s);
  int calls = 0;
  const EdgeMultiset ts = staged("a_irr", [&] { return a_irr_impl(sub, ctx, calls); });
  const Rational ts_cost = cost(sub, ts);
  ATSP_CHECK(ts_cost <= 2 * cfg.rho() * vs, "T_S above 2 rho value(S)");
  const ContractibleResult cr = make_contractible(inst, sub, srec, ts);
  ATSP_CHECK(cost(inst, cr.f) <= ts_cost, "F_S costs more than T_S");

  auto [con, crec] = contract(inst, s);
  ATSP_CHECK(total_value(con) < total - (1 - cfg.delta) * vs, "contracting a reducible set saved too little");
  int rest = 0;
  const EdgeMultiset t = a_lam_impl(con, ctx, rest);
  const Rational t_cost = cost(con, t);
  ATSP_CHECK(t_cost <= cfg.ratio() * total_value(con), "contracted tour above ratio * value");
  EdgeMultiset f = lift(inst, con, crec, t).edges;
  ATSP_CHECK(cost(inst, f) <= t_cost, "lift costs more than the contracted tour");
  f.add(cr.f);
  ATSP_CHECK(is_tour(inst.graph(), f), "a_lam output is not a tour");
  ATSP_CHECK(cost(inst, f) <= cfg.ratio() * total, "a_lam tour above ratio * value");
  steps = 1 + calls + rest;
  ATSP_CHECK(steps <= count_nonsingleton(inst), "a_lam recursion exceeds |L>=2|");
  return f;
}

}  // namespace

EdgeMultiset a_lam(const Instance& inst, const SolverConfig& cfg, PipelineStats* stats) {
  cfg.validate();
  PipelineStats local;
  Ctx ctx{cfg, stats ? *stats : local};
  int steps = 0;
  return staged("a_lam", [&] { return a_lam_impl(inst, ctx, steps); });
}

EdgeMultiset a_irr(const Instance& inst, const SolverConfig& cfg, PipelineStats* stats) {
  cfg.validate();
  PipelineStats local;
  Ctx ctx{cfg, stats ? *stats : local};
  int calls = 0;
  return staged("a_irr", [&] { return a_irr_impl(inst, ctx, calls); });
}

EdgeMultiset a_ver(const Instance& inst, const Subtour& backbone, const SolverConfig& cfg,
                   PipelineStats* stats) {
  cfg.validate();
  PipelineStats local;
  Ctx ctx{cfg, stats ? *stats : local};
  return staged("a_ver", [&] { return a_ver_impl(inst, backbone, ctx); });
}

QuasiBackbone quasi_backbone(const Instance& inst, const SolverConfig& cfg, PipelineStats* stats) {
  cfg.validate();
  PipelineStats local;
  Ctx ctx{cfg, stats ? *stats : local};
  return staged("quasi_backbone", [&] { return quasi_backbone_impl(inst, ctx); });
}

SolveReport approx_atsp(const Digraph& g, const EdgeValues& w, const SolverConfig& cfg) {
  cfg.validate();
  const int n = g.num_vertices();
  if (n < 1) throw SolveError("approx_atsp: empty graph");
  ATSP_CHECK(static_cast<int>(w.size()) == g.num_edges(), "one weight per edge");
  SolveReport rep;
  rep.bound = cfg.ratio();
  if (n == 1) {
    rep.weight = 0;
    rep.hk_value = 0;
    rep.ratio = 1;
    return rep;
  }
  if (n == 2) {
    int best[2] = {-1, -1};
    for (const Edge& e : g.edges()) {
      if (e.tail == e.head) continue;
      int& b = best[e.tail];
      if (b < 0 || w[e.id] < w[b]) b = e.id;
    }
    if (best[0] < 0 || best[1] < 0) throw SolveError("no feasible tour");
    rep.tour.add(best[0]);
    rep.tour.add(best[1]);
  } else {
    const HeldKarpSolution hk = solve_held_karp(g, w);
    const DualSolution dual = extract_laminar_dual(g, w, hk);
    const Instance inst = build_instance(g, w, hk, dual);
    rep.hk_value = hk.value;
    rep.stats.lp_pivots = hk.pivots;
    rep.stats.lp_rounds = hk.rounds;
    rep.stats.laminar_nonsingleton = count_nonsingleton(inst);
    ATSP_CHECK(total_value(inst) == hk.value, "value(I) differs from the Held-Karp value");
    const EdgeMultiset t = a_lam(inst, cfg, &rep.stats);
    for (const auto& [e, c] : t.counts()) rep.tour.add(*inst.graph().edge(e).preimage, c);
    ATSP_CHECK(multiset_cost(rep.tour, w) == cost(inst, t), "induced and input weights disagree on the tour");
    ATSP_CHECK(rep.stats.lam_levels + rep.stats.irr_recursive <= rep.stats.laminar_nonsingleton,
               "recursion exceeds |L>=2|");
  }
  rep.weight = multiset_cost(rep.tour, w);
  if (n == 2) rep.hk_value = rep.weight;  // the LP optimum on two vertices
  const auto bad = verify_tour(g, rep.tour);
  ATSP_CHECK(bad.empty(), "approx_atsp produced an invalid tour");
  rep.walk = eulerian_components(g, rep.tour)[0].walk;
  rep.ratio = sgn(rep.hk_value) == 0 ? Rational(1) : Rational(rep.weight / rep.hk_value);
  ATSP_CHECK(rep.weight <= rep.bound * rep.hk_value, "tour above ratio * Held-Karp");
  return rep;
}

BruteForceResult brute_force_atsp(const Digraph& g, const EdgeValues& w) {
  const int n = g.num_vertices();
  if (n > 10) throw SolveError("brute_force_atsp: n > 10");
  if (n < 1) throw SolveError("brute_force_atsp: empty graph");
  BruteForceResult r;
  if (n == 1) {
    r.weight = 0;
    r.tour.vertices = {0};
    return r;
  }
  auto t = min_closed_walk(g, w, all_vertices(n));
  if (!t) throw SolveError("no feasible tour");
  r.tour = std::move(*t);
  r.weight = multiset_cost(r.tour.edges, w);
  return r;
}

std::vector<std::string> verify_tour(const Digraph& g, const EdgeMultiset& t) {
  const int n = g.num_vertices();
  std::vector<std::string> bad;
  for (const auto& [e, c] : t.counts()) {
    if (e < 0 || e >= g.num_edges()) throw SolveError("verify_tour: edge id out of range");
  }
  if (!degree_imbalance(g, t).empty()) bad.push_back("Eulerian");
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& [e, c] : t.counts()) parent[find(g.edge(e).tail)] = find(g.edge(e).head);
  const VertexSet vs = multiset_vertices(g, t);
  for (int v : vs) {
    if (find(v) != find(vs.front())) {
      bad.push_back("connected");
      break;
    }
  }
  if (n > 1 && static_cast<int>(vs.size()) != n) bad.push_back("coverage");
  return bad;
}

nlohmann::json report_to_json(const SolveReport& r) {
  nlohmann::json merges = nlohmann::json::array();
  for (const MergeRunStats& m : r.stats.merges) {
    merges.push_back({{"stage", m.stage},
                      {"n", m.n},
                      {"rounds", m.rounds},
                      {"reinits", m.reinits},
                      {"reinit_limit", to_string(m.reinit_limit)},
                      {"weight", to_string(m.weight)},
                      {"bound", to_string(m.bound)},
                      {"alpha", to_string(m.alpha)},
                      {"beta", to_string(m.beta)},
                      {"epsilon", to_string(m.epsilon)}});
  }
  nlohmann::json tour = nlohmann::json::array();
  for (const auto& [e, c] : r.tour.counts()) tour.push_back({e, c});
  return {{"tour", tour},
          {"walk", r.walk},
          {"weight", to_string(r.weight)},
          {"hk_value", to_string(r.hk_value)},
          {"ratio", to_string(r.ratio)},
          {"bound", to_string(r.bound)},
          {"stats",
           {{"lam_levels", r.stats.lam_levels},
            {"irr_calls", r.stats.irr_calls},
            {"irr_recursive", r.stats.irr_recursive},
            {"max_depth", r.stats.max_depth},
            {"laminar_nonsingleton", r.stats.laminar_nonsingleton},
            {"lp_pivots", r.stats.lp_pivots},
            {"lp_rounds", r.stats.lp_rounds},
            {"merges", merges}}}};
}

}  // namespace atsp
