#include "atsp/heldkarp.hpp"

#include <algorithm>
#include <sstream>

#include "atsp/errors.hpp"
#include "atsp/lp.hpp"

namespace atsp {

namespace {

LPRow cut_row(const Digraph& g, const VertexSet& s) {
  std::vector<char> in = membership(g.num_vertices(), s);
  LPRow row;
  row.sense = RowSense::kGreaterEqual;
  row.rhs = 2;
  for (const Edge& e : g.edges()) {
    if (in[e.tail] != in[e.head]) row.coeffs.push_back({e.id, Rational(1)});
  }
  return row;
}

std::string describe(const VertexSet& s) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "}";
  return os.str();
}

bool family_order(const VertexSet& a, const VertexSet& b) {
  if (a.size() != b.size()) return a.size() > b.size();
  return a < b;
}

}  // namespace

HeldKarpSolution solve_held_karp(const Digraph& g, const EdgeValues& w) {
  const int n = g.num_vertices();
  if (n < 2) throw SolveError("held-karp needs at least two vertices");
  ATSP_CHECK(static_cast<int>(w.size()) == g.num_edges(), "weight vector size");
  if (!strongly_connected(g, all_vertices(n))) throw SolveError("no feasible tour");

  LinearProgram lp;
  for (const Edge& e : g.edges()) lp.add_variable(w[e.id]);
  // Degree rows: +1 on out-edges, -1 on in-edges, so the dual of edge (u,v)
  // reads alpha_u - alpha_v + sum y_S <= w(u,v).
  for (int v = 0; v < n; ++v) {
    LPRow row;
    row.sense = RowSense::kEqual;
    row.rhs = 0;
    for (int e : g.out_edges(v)) {
      if (g.edge(e).head != v) row.coeffs.push_back({e, Rational(1)});
    }
    for (int e : g.in_edges(v)) {
      if (g.edge(e).tail != v) row.coeffs.push_back({e, Rational(-1)});
    }
    lp.add_row(std::move(row));
  }
  HeldKarpSolution hk;
  // Singleton cuts from the start; without them x = 0 is optimal.
  for (int v = 0; v < n; ++v) {
    hk.cuts.push_back({v});
    lp.add_row(cut_row(g, {v}));
  }

  SimplexSolver solver(std::move(lp));
  LPOutcome out = solver.solve();
  hk.rounds = 1;
  while (true) {
    if (out.status != LPStatus::kOptimal) throw SolveError("no feasible tour");
    std::optional<VertexSet> s = separate(g, out.primal);
    if (!s) break;
    hk.cuts.push_back(*s);
    out = solver.add_row_and_resolve(cut_row(g, *s));
    ++hk.rounds;
  }

  hk.x = out.primal;
  hk.value = out.objective;
  hk.alpha.assign(out.dual.begin(), out.dual.begin() + n);
  hk.cut_duals.assign(out.dual.begin() + n, out.dual.end());
  hk.pivots = solver.total_pivots();
  return hk;
}

std::optional<VertexSet> separate(const Digraph& g, const EdgeValues& x) {
  const int n = g.num_vertices();
  std::optional<VertexSet> best;
  Rational best_value = 1;
  auto consider = [&](const VertexSet& s, const Rational& v) {
    if (v < best_value) {
      best_value = v;
      best = s;
    }
  };
  for (int t = 1; t < n; ++t) {
    CutResult out = min_st_cut(g, x, 0, t);
    consider(out.source_side, out.value);
    CutResult in = min_st_cut(g, x, t, 0);
    consider(in.source_side, in.value);
  }
  return best;
}

bool crossing(const VertexSet& a, const VertexSet& b) {
  return intersects(a, b) && !is_subset(a, b) && !is_subset(b, a);
}

bool is_laminar(const std::vector<VertexSet>& family) {
  for (std::size_t i = 0; i < family.size(); ++i) {
    for (std::size_t j = i + 1; j < family.size(); ++j) {
      if (crossing(family[i], family[j])) return false;
    }
  }
  return true;
}

void uncross_step(std::map<VertexSet, Rational>& y, const VertexSet& a,
                  const VertexSet& b) {
  if (!crossing(a, b)) throw SolveError("not a crossing pair");
  auto ia = y.find(a);
  auto ib = y.find(b);
  ATSP_CHECK(ia != y.end() && ib != y.end() && sgn(ia->second) > 0 &&
                 sgn(ib->second) > 0,
             "uncross_step needs positive y on both sets");
  const Rational eps = std::min(ia->second, ib->second);
  ia->second -= eps;
  ib->second -= eps;
  if (sgn(ia->second) == 0) y.erase(ia);
  if (sgn(ib->second) == 0) y.erase(ib);
  y[set_difference(a, b)] += eps;
  y[set_difference(b, a)] += eps;
}

DualSolution extract_laminar_dual(const Digraph& g, const EdgeValues& w,
                                  const HeldKarpSolution& hk) {
  ATSP_CHECK(hk.cuts.size() == hk.cut_duals.size(), "cut duals out of sync");
  std::map<VertexSet, Rational> y;
  for (std::size_t i = 0; i < hk.cuts.size(); ++i) {
    ATSP_CHECK(sgn(hk.cut_duals[i]) >= 0, "negative cut dual");
    if (sgn(hk.cut_duals[i]) > 0) y[hk.cuts[i]] += hk.cut_duals[i];
  }

  auto weighted_size = [&y] {
    Rational total = 0;
    for (const auto& [s, v] : y) total += v * static_cast<long>(s.size());
    return total;
  };

  DualSolution dual;
  Rational potential = weighted_size();
  while (true) {
    std::vector<VertexSet> sets;
    for (const auto& [s, v] : y) sets.push_back(s);
    std::sort(sets.begin(), sets.end(), family_order);
    std::optional<std::pair<VertexSet, VertexSet>> pair;
    for (std::size_t i = 0; i < sets.size() && !pair; ++i) {
      for (std::size_t j = i + 1; j < sets.size(); ++j) {
        if (crossing(sets[i], sets[j])) {
          pair.emplace(sets[i], sets[j]);
          break;
        }
      }
    }
    if (!pair) break;
    uncross_step(y, pair->first, pair->second);
    ++dual.uncross_steps;
    Rational next = weighted_size();
    ATSP_CHECK(next < potential, "uncrossing did not decrease sum |S| y_S");
    potential = next;
  }

  // alpha is only defined up to a common shift; pin alpha_0 = 0.
  dual.alpha = hk.alpha;
  const Rational shift = dual.alpha.empty() ? Rational(0) : dual.alpha[0];
  for (auto& a : dual.alpha) a -= shift;
  std::vector<VertexSet> sets;
  for (const auto& [s, v] : y) sets.push_back(s);
  std::sort(sets.begin(), sets.end(), family_order);
  for (const VertexSet& s : sets) {
    dual.family.push_back(s);
    dual.y.push_back(y.at(s));
  }

  std::vector<std::string> problems = audit_dual(g, w, hk.x, hk.value, dual);
  ATSP_CHECK(problems.empty(), "laminar dual audit failed: " + problems.front());
  return dual;
}

std::vector<std::string> audit_dual(const Digraph& g, const EdgeValues& w,
                                    const EdgeValues& x, const Rational& value,
                                    const DualSolution& dual) {
  std::vector<std::string> problems;
  if (!is_laminar(dual.family)) problems.push_back("family is not laminar");
  Rational obj = 0;
  for (const Rational& v : dual.y) {
    if (sgn(v) <= 0) problems.push_back("nonpositive y in support");
    obj += 2 * v;
  }
  if (obj != value) {
    problems.push_back("dual objective " + to_string(obj) + " != primal " +
                       to_string(value));
  }
  for (const VertexSet& s : dual.family) {
    if (cut_value(g, x, s) != 2) problems.push_back("set " + describe(s) + " not tight");
  }
  const int n = g.num_vertices();
  std::vector<Rational> crossed(g.num_edges(), Rational(0));
  for (std::size_t i = 0; i < dual.family.size(); ++i) {
    std::vector<char> in = membership(n, dual.family[i]);
    for (const Edge& e : g.edges()) {
      if (in[e.tail] != in[e.head]) crossed[e.id] += dual.y[i];
    }
  }
  for (const Edge& e : g.edges()) {
    Rational lhs = dual.alpha[e.tail] - dual.alpha[e.head] + crossed[e.id];
    if (e.tail == e.head) lhs = 0;
    if (lhs > w[e.id]) {
      problems.push_back("edge " + std::to_string(e.id) + " violates its dual row");
    } else if (sgn(x[e.id]) > 0 && lhs != w[e.id]) {
      problems.push_back("edge " + std::to_string(e.id) + " has x > 0 but slack dual row");
    }
  }
  return problems;
}

}  // namespace atsp
