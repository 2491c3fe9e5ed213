#include "atsp/vertebrate.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "atsp/errors.hpp"
#include "atsp/lp.hpp"
#include "atsp/spc_singleton.hpp"

namespace atsp {

LevelOrder level_order(const Instance& inst) {
  const int n = inst.num_vertices();
  std::vector<int> ids;
  for (int id = 0; id < inst.laminar().size(); ++id) {
    if (inst.laminar().set(id).vertices.size() >= 2) ids.push_back(id);
  }
  // Canonical ids run size descending, lexicographic on ties.
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
    return inst.laminar().set(a).vertices.size() < inst.laminar().set(b).vertices.size();
  });
  LevelOrder order;
  for (int id : ids) order.sets.push_back(inst.laminar().set(id).vertices);
  if (order.sets.empty() || static_cast<int>(order.sets.back().size()) != n) order.sets.push_back(all_vertices(n));
  order.level.assign(n, -1);
  for (int i = static_cast<int>(order.sets.size()) - 1; i >= 0; --i) {
    for (int v : order.sets[i]) order.level[v] = i;
  }
  return order;
}

std::vector<EdgeKind> classify_edges(const Digraph& g, const LevelOrder& order) {
  std::vector<EdgeKind> kinds;
  kinds.reserve(g.num_edges());
  for (const Edge& e : g.edges()) {
    int lu = order.level.at(e.tail), lv = order.level.at(e.head);
    kinds.push_back(lv < lu ? EdgeKind::kForward : lu < lv ? EdgeKind::kBackward : EdgeKind::kNeutral);
  }
  return kinds;
}

std::vector<int> unvisited_nonsingletons(const Instance& inst, const VertexSet& backbone_vertices) {
  std::vector<int> out;
  for (int id = 0; id < inst.laminar().size(); ++id) {
    const VertexSet& s = inst.laminar().set(id).vertices;
    if (s.size() >= 2 && !intersects(s, backbone_vertices)) out.push_back(id);
  }
  return out;
}

std::vector<std::string> witness_flow_violations(const Digraph& g, const std::vector<EdgeKind>& kinds,
                                                 const EdgeValues& z, const EdgeValues& f,
                                                 const VertexSet& backbone_vertices) {
  std::vector<std::string> out;
  const int n = g.num_vertices();
  std::vector<Rational> balance(n);
  for (const Edge& e : g.edges()) {
    const Rational& fe = f[e.id];
    const std::string tag = "edge " + std::to_string(e.id);
    if (sgn(fe) < 0 || fe > z[e.id]) out.push_back("capacity: " + tag);
    if (kinds[e.id] == EdgeKind::kBackward && sgn(fe) != 0) out.push_back("backward edge carries flow: " + tag);
    if (kinds[e.id] == EdgeKind::kForward && fe != z[e.id]) out.push_back("forward edge not saturated: " + tag);
    balance[e.tail] += fe;
    balance[e.head] -= fe;
  }
  auto in_b = membership(n, backbone_vertices);
  for (int v = 0; v < n; ++v) {
    if (!in_b[v] && sgn(balance[v]) < 0) out.push_back("balance: vertex " + std::to_string(v));
  }
  return out;
}

WitnessFlow compute_witness_flow(const Instance& inst, const VertexSet& backbone_vertices) {
  const Digraph& g = inst.graph();
  const int n = g.num_vertices();
  auto kinds = classify_edges(g, level_order(inst));
  LinearProgram lp;
  lp.sense = ObjectiveSense::kMaximize;
  std::vector<int> var(g.num_edges(), -1);
  Rational forward_mass;
  for (const Edge& e : g.edges()) {
    if (kinds[e.id] == EdgeKind::kBackward) continue;
    bool fwd = kinds[e.id] == EdgeKind::kForward;
    if (fwd) forward_mass += inst.x()[e.id];
    var[e.id] = lp.add_variable(Rational(fwd ? 1 : 0), Rational(0), inst.x()[e.id]);
  }
  auto in_b = membership(n, backbone_vertices);
  for (int v = 0; v < n; ++v) {
    if (in_b[v]) continue;
    LPRow row;
    row.sense = RowSense::kGreaterEqual;
    for (int e : g.out_edges(v)) {
      if (var[e] >= 0) row.coeffs.emplace_back(var[e], Rational(1));
    }
    for (int e : g.in_edges(v)) {
      if (var[e] >= 0) row.coeffs.emplace_back(var[e], Rational(-1));
    }
    if (!row.coeffs.empty()) lp.add_row(std::move(row));
  }
  LPOutcome out = solve_lp(lp);
  ATSP_CHECK(out.status == LPStatus::kOptimal, "witness LP not optimal (f = 0 is feasible and f is bounded)");
  WitnessFlow wf;
  wf.f.assign(g.num_edges(), Rational(0));
  for (const Edge& e : g.edges()) {
    if (var[e.id] >= 0) wf.f[e.id] = out.primal[var[e.id]];
  }
  wf.objective = out.objective;
  wf.forward_mass = forward_mass;
  if (wf.objective != forward_mass) {
    std::string msg = "witness LP optimum " + to_string(wf.objective) + " < x(E_f) = " + to_string(forward_mass) +
                      ": not a vertebrate pair";
    auto missed = unvisited_nonsingletons(inst, backbone_vertices);
    if (!missed.empty()) msg += " (laminar set " + std::to_string(missed.front()) + " misses the backbone)";
    throw SolveError(msg);
  }
  auto bad = witness_flow_violations(g, kinds, inst.x(), wf.f, backbone_vertices);
  ATSP_CHECK(bad.empty(), "witness LP optimum is not a witness flow: " + (bad.empty() ? "" : bad.front()));
  return wf;
}

std::vector<MarkedCopy> split_to_marks(const Digraph& g, const EdgeValues& x, const EdgeValues& f) {
  std::vector<MarkedCopy> out;
  for (const Edge& e : g.edges()) {
    const Rational& xe = x[e.id];
    const Rational& fe = f[e.id];
    ATSP_CHECK(sgn(fe) >= 0 && fe <= xe, "split_to_marks: f outside [0, x]");
    if (sgn(xe) == 0) continue;
    if (sgn(fe) > 0) out.push_back({e.id, fe, true});
    if (fe < xe) out.push_back({e.id, Rational(xe - fe), false});
  }
  return out;
}

std::string two_cycle_defect(const Digraph& g, const std::vector<MarkedCopy>& copies,
                             const std::vector<int>& cycle, const VertexSet& backbone_vertices) {
  if (cycle.empty()) return "empty cycle";
  std::map<int, int> visits;
  std::vector<int> sorted = cycle;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return "copy used twice";
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    const MarkedCopy& a = copies[cycle[k]];
    const MarkedCopy& b = copies[cycle[(k + 1) % cycle.size()]];
    int v = g.edge(a.edge).head;
    if (v != g.edge(b.edge).tail) return "not closed at position " + std::to_string(k);
    if (++visits[v] > 2) return "vertex " + std::to_string(v) + " visited three times";
    if (a.marked && !b.marked && !contains(backbone_vertices, v)) {
      return "marked arrival followed by unmarked departure at vertex " + std::to_string(v);
    }
  }
  return "";
}

namespace {

// Marked out-mass minus marked in-mass per vertex, and plain circulation defect.
void residual_balance(const Digraph& g, const std::vector<MarkedCopy>& copies, const std::vector<Rational>& res,
                      std::vector<Rational>& marked, std::vector<Rational>& total) {
  const int n = g.num_vertices();
  marked.assign(n, Rational(0));
  total.assign(n, Rational(0));
  for (std::size_t c = 0; c < copies.size(); ++c) {
    const Edge& e = g.edge(copies[c].edge);
    total[e.tail] += res[c];
    total[e.head] -= res[c];
    if (copies[c].marked) {
      marked[e.tail] += res[c];
      marked[e.head] -= res[c];
    }
  }
}

std::string balance_defect(const Digraph& g, const std::vector<MarkedCopy>& copies, const std::vector<Rational>& res,
                           const std::vector<char>& in_b) {
  std::vector<Rational> marked, total;
  residual_balance(g, copies, res, marked, total);
  for (int v = 0; v < g.num_vertices(); ++v) {
    if (sgn(total[v]) != 0) return "not a circulation at vertex " + std::to_string(v);
    if (!in_b[v] && sgn(marked[v]) < 0) return "marked in-flow exceeds out-flow at vertex " + std::to_string(v);
  }
  return "";
}

}  // namespace

std::vector<TwoCycle> consistent_2cycle_decomposition(const Digraph& g, const std::vector<MarkedCopy>& copies,
                                                      const VertexSet& backbone_vertices) {
  const int n = g.num_vertices();
  const int m = static_cast<int>(copies.size());
  auto in_b = membership(n, backbone_vertices);
  std::vector<Rational> res(m);
  std::vector<std::vector<int>> out(n);
  for (int c = 0; c < m; ++c) {
    ATSP_CHECK(sgn(copies[c].x) > 0, "copy with nonpositive mass");
    res[c] = copies[c].x;
    out[g.edge(copies[c].edge).tail].push_back(c);
  }
  if (auto d = balance_defect(g, copies, res, in_b); !d.empty()) throw SolveError("2-cycle decomposition: " + d);

  std::vector<TwoCycle> cycles;
  int alive = m;
  while (alive > 0) {
    int start = 0;
    while (sgn(res[start]) == 0) ++start;
    std::vector<int> walk{start};
    std::vector<char> used(m, 0);
    used[start] = 1;
    std::map<int, std::vector<int>> visits;
    visits[g.edge(copies[start].edge).tail].push_back(0);
    std::size_t from = 0;
    for (;;) {
      const int cur = walk.back();
      const int v = g.edge(copies[cur].edge).head;
      const int k = static_cast<int>(walk.size());
      auto& vis = visits[v];
      vis.push_back(k);
      auto mark = [&](int pos) { return copies[walk[pos]].marked; };
      if (in_b[v] && vis.size() == 2) {
        from = vis[0];
        break;
      }
      if (!in_b[v] && vis.size() == 2) {
        bool all_marked = true;
        for (int c : out[v]) {
          if (sgn(res[c]) > 0 && !copies[c].marked) all_marked = false;
        }
        if (mark(vis[0]) == mark(k - 1) || all_marked) {
          from = vis[0];
          break;
        }
      }
      if (!in_b[v] && vis.size() == 3) {
        from = mark(vis[1]) == mark(k - 1) ? vis[1] : vis[0];
        break;
      }
      int next = -1;
      for (int c : out[v]) {
        if (sgn(res[c]) == 0 || used[c]) continue;
        if (copies[c].marked == copies[cur].marked) {
          next = c;
          break;
        }
        if (next < 0) next = c;
      }
      ATSP_CHECK(next >= 0, "2-cycle walk stuck at vertex " + std::to_string(v));
      // Off the backbone a marked arrival always has a marked departure left.
      ATSP_CHECK(in_b[v] || !copies[cur].marked || copies[next].marked, "2-cycle walk lost its mark");
      walk.push_back(next);
      used[next] = 1;
    }
    TwoCycle cyc;
    cyc.copies.assign(walk.begin() + static_cast<std::ptrdiff_t>(from), walk.end());
    std::string defect = two_cycle_defect(g, copies, cyc.copies, backbone_vertices);
    ATSP_CHECK(defect.empty(), "extracted walk is not a consistent 2-cycle: " + defect);
    cyc.lambda = res[cyc.copies.front()];
    for (int c : cyc.copies) cyc.lambda = std::min(cyc.lambda, res[c]);
    for (int c : cyc.copies) {
      res[c] -= cyc.lambda;
      if (sgn(res[c]) == 0) --alive;
    }
    std::string bal = balance_defect(g, copies, res, in_b);
    ATSP_CHECK(bal.empty(), "residual lost the witness balance: " + bal);
    cycles.push_back(std::move(cyc));
  }
  ATSP_CHECK(static_cast<int>(cycles.size()) <= m, "more 2-cycles than copies");
  return cycles;
}

TuRounding tu_round(const Digraph& g, const EdgeValues& w, const EdgeValues& z, const EdgeValues& f) {
  const int n = g.num_vertices();
  const int m = g.num_edges();
  std::vector<Rational> f_in(n), f_out(n), g_in(n);
  for (const Edge& e : g.edges()) {
    if (sgn(w[e.id]) < 0) throw SolveError("tu_round: negative weight");
    if (sgn(f[e.id]) < 0 || f[e.id] > z[e.id]) throw SolveError("tu_round: f outside [0, z]");
    f_in[e.head] += f[e.id];
    f_out[e.tail] += f[e.id];
    g_in[e.head] += z[e.id] - f[e.id];
  }
  {
    std::vector<Rational> bal(n);
    for (const Edge& e : g.edges()) {
      bal[e.tail] += z[e.id];
      bal[e.head] -= z[e.id];
    }
    for (int v = 0; v < n; ++v) {
      if (sgn(bal[v]) != 0) throw SolveError("tu_round: z is not a circulation");
    }
  }
  auto to_i64 = [](const mpz_class& q) { return static_cast<std::int64_t>(q.get_si()); };

  // Tree rows become arcs: the edge (v^f, v^f') carries f(delta-(v)), the edge
  // (v^g, v^g') carries g(delta-(v)), and v^g -> v^f carries the f-surplus
  // f(delta+(v)) - f(delta-(v)). The root rows force z-conservation.
  FlowNetwork net;
  for (int i = 0; i < 4 * n; ++i) net.add_node();
  auto vg = [](int v) { return 4 * v; };
  auto vf = [](int v) { return 4 * v + 1; };
  auto vfp = [](int v) { return 4 * v + 2; };
  auto vgp = [](int v) { return 4 * v + 3; };
  std::vector<int> f_arc(m), g_arc(m);
  for (const Edge& e : g.edges()) {
    std::int64_t f_upper = sgn(f[e.id]) == 0 ? 0 : kInfiniteCapacity;
    std::int64_t g_upper = f[e.id] == z[e.id] ? 0 : kInfiniteCapacity;
    f_arc[e.id] = net.add_arc(vf(e.tail), vfp(e.head), 0, f_upper, w[e.id]);
    g_arc[e.id] = net.add_arc(vg(e.tail), vgp(e.head), 0, g_upper, w[e.id]);
  }
  for (int v = 0; v < n; ++v) {
    net.add_arc(vfp(v), vf(v), to_i64(floor_of(f_in[v])), to_i64(ceil_of(f_in[v])), Rational(0));
    net.add_arc(vgp(v), vg(v), to_i64(floor_of(g_in[v])), to_i64(ceil_of(g_in[v])), Rational(0));
    net.add_arc(vg(v), vf(v), 0, kInfiniteCapacity, Rational(0));
    if (f_out[v] < f_in[v]) net.add_arc(vf(v), vg(v), 0, kInfiniteCapacity, Rational(0));
  }
  FlowSolution sol;
  try {
    sol = min_cost_integral_flow(net);
  } catch (const InfeasibleFlow& err) {
    ATSP_CHECK(false, std::string("tu_round: (f, z - f) is feasible but rounding failed: ") + err.what());
  }

  TuRounding r;
  r.z.assign(m, 0);
  r.f.assign(m, 0);
  Rational frac_cost;
  for (const Edge& e : g.edges()) {
    r.f[e.id] = sol.flow[f_arc[e.id]];
    r.z[e.id] = r.f[e.id] + sol.flow[g_arc[e.id]];
    r.cost += w[e.id] * r.z[e.id];
    frac_cost += w[e.id] * z[e.id];
  }
  ATSP_CHECK(r.cost <= frac_cost, "tu_round increased the cost");
  std::vector<std::int64_t> zb(n), fi(n), fo(n), gi(n);
  for (const Edge& e : g.edges()) {
    ATSP_CHECK(r.f[e.id] >= 0 && r.f[e.id] <= r.z[e.id], "tu_round: f-bar outside [0, z-bar]");
    if (f[e.id] == z[e.id]) ATSP_CHECK(r.f[e.id] == r.z[e.id], "tu_round: saturation lost");
    if (sgn(f[e.id]) == 0) ATSP_CHECK(r.f[e.id] == 0, "tu_round: flow on an f = 0 edge");
    zb[e.tail] += r.z[e.id];
    zb[e.head] -= r.z[e.id];
    fo[e.tail] += r.f[e.id];
    fi[e.head] += r.f[e.id];
    gi[e.head] += r.z[e.id] - r.f[e.id];
  }
  for (int v = 0; v < n; ++v) {
    ATSP_CHECK(zb[v] == 0, "tu_round: z-bar is not a circulation");
    if (f_out[v] >= f_in[v]) ATSP_CHECK(fo[v] >= fi[v], "tu_round: f-balance lost");
    ATSP_CHECK(floor_of(f_in[v]) <= fi[v] && fi[v] <= ceil_of(f_in[v]), "tu_round: f in-degree out of range");
    ATSP_CHECK(floor_of(g_in[v]) <= gi[v] && gi[v] <= ceil_of(g_in[v]), "tu_round: g in-degree out of range");
  }
  return r;
}

void validate_u_family(const Instance& inst, const VertexSet& backbone_vertices, const std::vector<VertexSet>& us) {
  const int n = inst.num_vertices();
  std::vector<int> owner(n, -1);
  for (std::size_t j = 0; j < us.size(); ++j) {
    const std::string tag = "invalid U_" + std::to_string(j) + ": ";
    VertexSet u = make_vertex_set(us[j]);
    if (u.empty()) throw SolveError(tag + "empty");
    if (u.front() < 0 || u.back() >= n) throw SolveError(tag + "vertex out of range");
    if (static_cast<int>(u.size()) == n) throw SolveError(tag + "equals V");
    if (intersects(u, backbone_vertices)) throw SolveError(tag + "meets the backbone");
    for (int v : u) {
      if (owner[v] >= 0) throw SolveError(tag + "overlaps U_" + std::to_string(owner[v]));
      owner[v] = static_cast<int>(j);
    }
    if (!strongly_connected(inst.graph(), u)) throw SolveError(tag + "not strongly connected");
    for (int id = 0; id < inst.laminar().size(); ++id) {
      const VertexSet& s = inst.laminar().set(id).vertices;
      if (s.size() >= 2 && intersects(u, s) && !is_subset(u, s)) {
        throw SolveError(tag + "crosses laminar set " + std::to_string(id));
      }
    }
  }
}

namespace {

// A 2-cycle with per-position redirections to auxiliary vertices.
struct Piece {
  std::vector<int> copies;
  Rational lambda;
  std::vector<int> into_aux;
  std::vector<int> from_aux;
  std::vector<char> removed;
};

}  // namespace

EdgeMultiset solve_main_lemma(const Instance& inst, const VertexSet& backbone_vertices,
                              const std::vector<VertexSet>& us_in, MainLemmaStats* stats) {
  validate_u_family(inst, backbone_vertices, us_in);
  const Digraph& g = inst.graph();
  const int n = g.num_vertices();
  const int ell = static_cast<int>(us_in.size());
  std::vector<VertexSet> us;
  for (const VertexSet& u : us_in) us.push_back(make_vertex_set(u));

  WitnessFlow wf = compute_witness_flow(inst, backbone_vertices);
  std::vector<MarkedCopy> copies = split_to_marks(g, inst.x(), wf.f);
  std::vector<TwoCycle> decomposition = consistent_2cycle_decomposition(g, copies, backbone_vertices);

  std::vector<Piece> pieces;
  for (TwoCycle& c : decomposition) {
    Piece p;
    const std::size_t len = c.copies.size();
    p.copies = std::move(c.copies);
    p.lambda = c.lambda;
    p.into_aux.assign(len, -1);
    p.from_aux.assign(len, -1);
    p.removed.assign(len, 0);
    pieces.push_back(std::move(p));
  }

  std::vector<char> marked_entry(ell, 0);
  const Rational half = make_rational(1, 2);
  for (int i = 0; i < ell; ++i) {
    auto in = membership(n, us[i]);
    auto enters = [&](int c) { return !in[g.edge(copies[c].edge).tail] && in[g.edge(copies[c].edge).head]; };
    Rational marked_mass, unmarked_mass;
    for (std::size_t c = 0; c < copies.size(); ++c) {
      if (enters(static_cast<int>(c))) (copies[c].marked ? marked_mass : unmarked_mass) += copies[c].x;
    }
    ATSP_CHECK(marked_mass + unmarked_mass >= 1, "U_j with x(delta-) < 1");
    const bool want_marked = marked_mass >= half;
    marked_entry[i] = want_marked;
    // X_j^-: entering copies of one mark by copy id, then piece order, until
    // the mass is exactly 1/2; the last piece is split if needed.
    std::vector<std::pair<int, int>> chosen;
    Rational need = half;
    for (int c = 0; c < static_cast<int>(copies.size()) && sgn(need) > 0; ++c) {
      if (!enters(c) || copies[c].marked != want_marked) continue;
      for (std::size_t p = 0; p < pieces.size() && sgn(need) > 0; ++p) {
        auto it = std::find(pieces[p].copies.begin(), pieces[p].copies.end(), c);
        if (it == pieces[p].copies.end()) continue;
        const int pos = static_cast<int>(it - pieces[p].copies.begin());
        if (pieces[p].lambda > need) {
          Piece rest = pieces[p];
          rest.lambda -= need;
          pieces[p].lambda = need;
          pieces.push_back(std::move(rest));
          const int copy = static_cast<int>(pieces.size()) - 1;
          const std::size_t before = chosen.size();
          for (std::size_t q = 0; q < before; ++q) {
            if (chosen[q].first == static_cast<int>(p)) chosen.emplace_back(copy, chosen[q].second);
          }
        }
        need -= pieces[p].lambda;
        chosen.emplace_back(static_cast<int>(p), pos);
      }
    }
    ATSP_CHECK(sgn(need) == 0, "could not select X_j^- of mass 1/2");
    for (auto [p, pos] : chosen) {
      Piece& piece = pieces[p];
      const int len = static_cast<int>(piece.copies.size());
      ATSP_CHECK(piece.into_aux[pos] < 0, "entry occurrence chosen twice");
      piece.into_aux[pos] = i;
      int q = (pos + 1) % len;
      while (in[g.edge(copies[piece.copies[q]].edge).head]) {
        ATSP_CHECK(q != pos, "2-cycle never leaves U_j");
        piece.removed[q] = 1;
        q = (q + 1) % len;
      }
      ATSP_CHECK(!piece.removed[q] && piece.from_aux[q] < 0, "exit occurrence reused");
      // Consistency carries a marked entry to a marked exit.
      ATSP_CHECK(!want_marked || copies[piece.copies[q]].marked, "marked entry left on an unmarked copy");
      piece.from_aux[q] = i;
    }
  }

  // x' on G' keyed by (copy, tail', head').
  auto aux = [n](int j) { return n + j; };
  std::map<std::tuple<int, int, int>, Rational> xprime;
  for (const Piece& p : pieces) {
    for (std::size_t q = 0; q < p.copies.size(); ++q) {
      if (p.removed[q]) continue;
      const Edge& e = g.edge(copies[p.copies[q]].edge);
      int t = p.from_aux[q] >= 0 ? aux(p.from_aux[q]) : e.tail;
      int h = p.into_aux[q] >= 0 ? aux(p.into_aux[q]) : e.head;
      xprime[{p.copies[q], t, h}] += p.lambda;
    }
  }
  Digraph gp(n + ell);
  EdgeValues wp, zp, fp;
  for (const auto& [key, val] : xprime) {
    auto [c, t, h] = key;
    gp.add_edge(t, h, copies[c].edge);
    wp.push_back(induced_weight(inst, copies[c].edge));
    zp.push_back(2 * val);
    fp.push_back(copies[c].marked ? Rational(2 * val) : Rational(0));
  }
  {
    std::vector<Rational> f_bal(n + ell), x_in(n + ell), f_in(n + ell);
    for (const Edge& e : gp.edges()) {
      f_bal[e.tail] += fp[e.id];
      f_bal[e.head] -= fp[e.id];
      x_in[e.head] += zp[e.id] / 2;
      f_in[e.head] += fp[e.id] / 2;
    }
    auto in_b = membership(n, backbone_vertices);
    for (int v = 0; v < n + ell; ++v) {
      if (v >= n || !in_b[v]) ATSP_CHECK(sgn(f_bal[v]) >= 0, "f' lost the witness balance");
    }
    for (int j = 0; j < ell; ++j) {
      ATSP_CHECK(x_in[aux(j)] == half, "x'(delta-(a_j)) != 1/2");
      ATSP_CHECK(f_in[aux(j)] == (marked_entry[j] ? half : Rational(0)), "f'(delta-(a_j)) not in {0, 1/2}");
    }
  }

  TuRounding r = tu_round(gp, wp, zp, fp);
  ATSP_CHECK(r.cost <= 2 * total_value(inst), "rounded cost above 2 value");

  EdgeMultiset f;
  EdgeValues fstar(g.num_edges(), Rational(0));
  std::vector<int> u_of(ell, -1), v_of(ell, -1), f_into_aux(ell, 0);
  std::vector<std::int64_t> zin(n);
  for (const Edge& e : gp.edges()) {
    if (r.z[e.id] == 0) continue;
    const int orig = *e.preimage;
    f.add(orig, r.z[e.id]);
    fstar[orig] += r.f[e.id];
    if (e.head < n) zin[e.head] += r.z[e.id];
    if (e.head >= n) {
      ATSP_CHECK(r.z[e.id] == 1 && u_of[e.head - n] < 0, "a_j entered more than once");
      u_of[e.head - n] = g.edge(orig).head;
      f_into_aux[e.head - n] = static_cast<int>(r.f[e.id]);
    }
    if (e.tail >= n) {
      ATSP_CHECK(r.z[e.id] == 1 && v_of[e.tail - n] < 0, "a_j left more than once");
      v_of[e.tail - n] = g.edge(orig).tail;
    }
  }
  for (int v = 0; v < n; ++v) {
    if (in_value(g, inst.x(), {v}) == 1) ATSP_CHECK(zin[v] <= 3, "z-bar'(delta-(v)) > 3");
  }

  std::vector<int> repair_lengths;
  for (int j = 0; j < ell; ++j) {
    ATSP_CHECK(u_of[j] >= 0 && v_of[j] >= 0, "a_j unused by z-bar'");
    auto path = shortest_path(g, inst.weights(), u_of[j], v_of[j], us[j]);
    ATSP_CHECK(path.has_value(), "U_j not strongly connected after validation");
    for (int e : path->edges) {
      f.add(e);
      if (f_into_aux[j] == 1) fstar[e] += 1;
    }
    repair_lengths.push_back(static_cast<int>(path->edges.size()));
  }

  EdgeValues zstar(g.num_edges(), Rational(0));
  for (const auto& [e, c] : f.counts()) zstar[e] = Rational(static_cast<long>(c));
  ATSP_CHECK(degree_imbalance(g, f).empty(), "main lemma output not Eulerian");
  auto bad = witness_flow_violations(g, classify_edges(g, level_order(inst)), zstar, fstar, backbone_vertices);
  ATSP_CHECK(bad.empty(), "f* is not a witness flow for z*: " + (bad.empty() ? "" : bad.front()));
  ATSP_CHECK(cost(inst, f) <= 2 * total_value(inst) + lb_bar(inst, backbone_vertices), "(a) cost bound fails");
  for (int j = 0; j < ell; ++j) ATSP_CHECK(in_value(g, zstar, us[j]) >= 1, "(b) U_j not entered");
  for (int v = 0; v < n; ++v) {
    if (in_value(g, inst.x(), {v}) == 1) ATSP_CHECK(in_value(g, zstar, {v}) <= 4, "(c) in-degree above 4");
  }
  ATSP_CHECK(verify_witnessed_components(inst, f, backbone_vertices).ok, "(d) crossing subtour misses the backbone");

  if (stats) {
    stats->copies = static_cast<int>(copies.size());
    stats->two_cycles = static_cast<int>(decomposition.size());
    stats->marked_entry = std::move(marked_entry);
    stats->rounded_cost = r.cost;
    stats->repair_lengths = std::move(repair_lengths);
    stats->witness = std::move(fstar);
  }
  return f;
}

std::vector<VertexSet> source_components(const Instance& inst, const std::vector<VertexSet>& partition) {
  LevelOrder order = level_order(inst);
  std::vector<VertexSet> us;
  for (const VertexSet& cls : partition) {
    VertexSet vi = make_vertex_set(cls);
    // Size-ascending order makes the first set meeting V_i inclusion-minimal.
    const VertexSet* s = nullptr;
    for (const VertexSet& cand : order.sets) {
      if (intersects(cand, vi)) {
        s = &cand;
        break;
      }
    }
    ATSP_CHECK(s != nullptr, "V meets every class");
    VertexSet vi_prime = set_intersection(vi, *s);
    us.push_back(scc_topological(inst.graph(), vi_prime).front());
  }
  return us;
}

EdgeMultiset solve_spc_vertebrate(const Instance& inst, const Subtour& backbone,
                                  const std::vector<VertexSet>& partition) {
  if (backbone.vertices.empty()) return solve_spc_singleton(inst, partition);
  validate_partition(inst, backbone.vertices, partition);
  if (!unvisited_nonsingletons(inst, backbone.vertices).empty()) {
    throw SolveError("not a vertebrate pair: a non-singleton set misses the backbone");
  }
  EdgeMultiset f = solve_main_lemma(inst, backbone.vertices, source_components(inst, partition));
  ATSP_CHECK(uncovered_classes(inst.graph(), f, partition).empty(), "vertebrate cover misses a class");
  Rational beta = 2 * total_value(inst) + lb_bar(inst, backbone.vertices);
  LightnessCheck light = check_lightness(inst, backbone.vertices, f, Rational(4), beta);
  ATSP_CHECK(light.ok, "vertebrate cover not (4, 2 value + lb(B-bar))-light: " + light.reason);
  return f;
}

WitnessedCheck verify_witnessed_components(const Instance& inst, const EdgeMultiset& z,
                                           const VertexSet& backbone_vertices) {
  WitnessedCheck res;
  for (Subtour& c : eulerian_components(inst.graph(), z)) {
    if (intersects(c.vertices, backbone_vertices)) continue;
    for (const LaminarSet& s : inst.laminar().sets()) {
      if (s.vertices.size() >= 2 && intersects(c.vertices, s.vertices) && !is_subset(c.vertices, s.vertices)) {
        res.ok = false;
        res.counterexample = std::move(c);
        return res;
      }
    }
  }
  return res;
}

}  // namespace atsp
