#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "atsp/errors.hpp"
#include "atsp/graph.hpp"
#include "atsp/lp.hpp"

namespace atsp {
namespace {

Digraph make_graph(int n, const std::vector<std::pair<int, int>>& es) {
  Digraph g(n);
  for (auto [a, b] : es) g.add_edge(a, b);
  return g;
}

Digraph random_graph(std::mt19937& rng, int n, double p) {
  Digraph g(n);
  std::bernoulli_distribution coin(p);
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u != v && coin(rng)) g.add_edge(u, v);
    }
  }
  return g;
}

// Transitive closure by repeated relaxation; reach[u][v] inside restrict.
std::vector<std::vector<char>> reachability(const Digraph& g, const VertexSet& restrict) {
  const int n = g.num_vertices();
  auto in = membership(n, restrict);
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (int v : restrict) reach[v][v] = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Edge& e : g.edges()) {
      if (!in[e.tail] || !in[e.head]) continue;
      for (int s : restrict) {
        if (reach[s][e.tail] && !reach[s][e.head]) {
          reach[s][e.head] = 1;
          changed = true;
        }
      }
    }
  }
  return reach;
}

TEST(SccTopological, ThreeCycleIsOneComponent) {
  Digraph g = make_graph(3, {{0, 1}, {1, 2}, {2, 0}});
  auto comps = scc_topological(g, all_vertices(3));
  ASSERT_EQ(comps.size(), 1u);
  EXPECT_EQ(comps[0], (VertexSet{0, 1, 2}));
}

TEST(SccTopological, PathGivesSingletonsInOrder) {
  Digraph g = make_graph(3, {{0, 1}, {1, 2}});
  auto comps = scc_topological(g, all_vertices(3));
  EXPECT_EQ(comps, (std::vector<VertexSet>{{0}, {1}, {2}}));
}

TEST(SccTopological, TwoCyclesJoinedByBridge) {
  Digraph g = make_graph(4, {{0, 1}, {1, 0}, {2, 3}, {3, 2}, {1, 2}});
  auto comps = scc_topological(g, all_vertices(4));
  EXPECT_EQ(comps, (std::vector<VertexSet>{{0, 1}, {2, 3}}));
}

TEST(SccTopological, EmptyRestrictIsAnError) {
  Digraph g = make_graph(2, {{0, 1}});
  EXPECT_THROW(scc_topological(g, {}), SolveError);
}

TEST(SccTopological, MatchesReachabilityOracle) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 2 + trial % 8;
    Digraph g = random_graph(rng, n, 0.3);
    VertexSet restrict;
    for (int v = 0; v < n; ++v) {
      if (rng() % 4 != 0) restrict.push_back(v);
    }
    if (restrict.empty()) continue;
    auto reach = reachability(g, restrict);
    auto comps = scc_topological(g, restrict);
    std::vector<int> comp_of(n, -1);
    std::size_t covered = 0;
    for (std::size_t c = 0; c < comps.size(); ++c) {
      covered += comps[c].size();
      for (int v : comps[c]) comp_of[v] = static_cast<int>(c);
    }
    ASSERT_EQ(covered, restrict.size());
    for (int a : restrict) {
      for (int b : restrict) {
        bool same = reach[a][b] && reach[b][a];
        EXPECT_EQ(same, comp_of[a] == comp_of[b]);
        if (reach[a][b]) EXPECT_LE(comp_of[a], comp_of[b]);
      }
    }
  }
}

// Minimum over all s-side vertex sets of the crossing capacity.
Rational brute_force_min_cut(const Digraph& g, const EdgeValues& cap, int s, int t) {
  const int n = g.num_vertices();
  std::optional<Rational> best;
  for (int mask = 0; mask < (1 << n); ++mask) {
    if (!(mask >> s & 1) || (mask >> t & 1)) continue;
    Rational c = 0;
    for (const Edge& e : g.edges()) {
      if ((mask >> e.tail & 1) && !(mask >> e.head & 1)) c += cap[e.id];
    }
    if (!best || c < *best) best = c;
  }
  return *best;
}

TEST(MinStCut, UnitThreeCycle) {
  Digraph g = make_graph(3, {{0, 1}, {1, 2}, {2, 0}});
  EdgeValues cap(3, Rational(1));
  auto r = min_st_cut(g, cap, 0, 1);
  EXPECT_EQ(r.value, 1);
  EXPECT_EQ(r.value, brute_force_min_cut(g, cap, 0, 1));
  EXPECT_TRUE(contains(r.source_side, 0));
  EXPECT_FALSE(contains(r.source_side, 1));
}

TEST(MinStCut, ParallelEdgesAdd) {
  Digraph g = make_graph(2, {{0, 1}, {0, 1}});
  EdgeValues cap(2, Rational(1));
  EXPECT_EQ(min_st_cut(g, cap, 0, 1).value, 2);
}

TEST(MinStCut, NoEdges) {
  Digraph g(3);
  auto r = min_st_cut(g, {}, 0, 2);
  EXPECT_EQ(r.value, 0);
  EXPECT_EQ(r.source_side, (VertexSet{0}));
}

TEST(MinStCut, AgreesWithCutEnumeration) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 150; ++trial) {
    int n = 2 + trial % 7;
    Digraph g = random_graph(rng, n, 0.5);
    EdgeValues cap;
    for (int e = 0; e < g.num_edges(); ++e) cap.push_back(make_rational(rng() % 7, 1 + rng() % 3));
    int s = rng() % n, t = rng() % n;
    if (s == t) continue;
    auto r = min_st_cut(g, cap, s, t);
    EXPECT_EQ(r.value, brute_force_min_cut(g, cap, s, t));
    EXPECT_EQ(out_value(g, cap, r.source_side), r.value);
  }
}

TEST(ShortestPath, SameEndpointsGiveEmptyPath) {
  Digraph g = make_graph(2, {{0, 1}});
  auto p = shortest_path(g, {Rational(1)}, 0, 0, all_vertices(2));
  ASSERT_TRUE(p);
  EXPECT_TRUE(p->edges.empty());
  EXPECT_EQ(p->weight, 0);
}

TEST(ShortestPath, PrefersSmallerSum) {
  Digraph g = make_graph(3, {{0, 1}, {0, 2}, {2, 1}});
  EdgeValues w{Rational(3), Rational(1), Rational(1)};
  auto p = shortest_path(g, w, 0, 1, all_vertices(3));
  ASSERT_TRUE(p);
  EXPECT_EQ(p->edges, (std::vector<int>{1, 2}));
  EXPECT_EQ(p->weight, 2);
}

TEST(ShortestPath, RestrictCanDisconnect) {
  Digraph g = make_graph(3, {{0, 2}, {2, 1}});
  EdgeValues w{Rational(1), Rational(1)};
  EXPECT_FALSE(shortest_path(g, w, 0, 1, {0, 1}));
}

TEST(ShortestPath, TiesGoToLexicographicallySmallestIds) {
  // Two equal-weight two-edge routes: 0-1-3 uses ids {2,3}, 0-2-3 uses {0,1}.
  Digraph g = make_graph(4, {{0, 2}, {2, 3}, {0, 1}, {1, 3}});
  EdgeValues w(4, Rational(1));
  auto p = shortest_path(g, w, 0, 3, all_vertices(4));
  ASSERT_TRUE(p);
  EXPECT_EQ(p->edges, (std::vector<int>{0, 1}));
}

TEST(ShortestPath, MatchesBellmanFord) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 2 + trial % 8;
    Digraph g = random_graph(rng, n, 0.35);
    EdgeValues w;
    for (int e = 0; e < g.num_edges(); ++e) w.push_back(make_rational(rng() % 5, 1 + rng() % 2));
    VertexSet restrict;
    for (int v = 0; v < n; ++v) {
      if (rng() % 5 != 0) restrict.push_back(v);
    }
    if (restrict.size() < 2) continue;
    int u = restrict[rng() % restrict.size()], v = restrict[rng() % restrict.size()];
    auto in = membership(n, restrict);
    std::vector<std::optional<Rational>> bf(n);
    bf[u] = Rational(0);
    for (int it = 0; it < n; ++it) {
      for (const Edge& e : g.edges()) {
        if (!in[e.tail] || !in[e.head] || !bf[e.tail]) continue;
        Rational c = *bf[e.tail] + w[e.id];
        if (!bf[e.head] || c < *bf[e.head]) bf[e.head] = c;
      }
    }
    auto p = shortest_path(g, w, u, v, restrict);
    ASSERT_EQ(p.has_value(), bf[v].has_value());
    if (!p) continue;
    EXPECT_EQ(p->weight, *bf[v]);
    Rational sum = 0;
    int cur = u;
    for (int e : p->edges) {
      EXPECT_EQ(g.edge(e).tail, cur);
      EXPECT_TRUE(in[g.edge(e).head]);
      cur = g.edge(e).head;
      sum += w[e];
    }
    EXPECT_EQ(cur, v);
    EXPECT_EQ(sum, p->weight);
    auto dist = shortest_distances(g, w, u, restrict);
    EXPECT_EQ(*dist[v], *bf[v]);
  }
}

TEST(EulerianComponents, TwoDisjointCycles) {
  Digraph g = make_graph(4, {{0, 1}, {1, 0}, {2, 3}, {3, 2}});
  EdgeMultiset f;
  for (int e = 0; e < 4; ++e) f.add(e);
  auto comps = eulerian_components(g, f);
  ASSERT_EQ(comps.size(), 2u);
  EXPECT_EQ(comps[0].vertices, (VertexSet{0, 1}));
  EXPECT_EQ(comps[1].vertices, (VertexSet{2, 3}));
  EXPECT_EQ(comps[0].walk, (std::vector<int>{0, 1}));
}

TEST(EulerianComponents, EmptyMultiset) {
  Digraph g = make_graph(2, {{0, 1}, {1, 0}});
  EXPECT_TRUE(eulerian_components(g, EdgeMultiset{}).empty());
}

TEST(EulerianComponents, ImbalanceIsReported) {
  Digraph g = make_graph(3, {{0, 1}, {1, 2}, {2, 0}, {1, 0}});
  EdgeMultiset f;
  f.add(0, 2);
  f.add(3);
  try {
    eulerian_components(g, f);
    FAIL() << "expected an error";
  } catch (const SolveError& e) {
    EXPECT_NE(std::string(e.what()).find("degree imbalance"), std::string::npos);
  }
}

TEST(EulerianComponents, WalksTraverseEveryCopy) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 3 + trial % 6;
    Digraph g(n);
    EdgeMultiset f;
    // Union of random closed walks is Eulerian.
    for (int c = 0; c < 3; ++c) {
      int len = 2 + rng() % n;
      std::vector<int> vs;
      for (int i = 0; i < len; ++i) vs.push_back(rng() % n);
      for (int i = 0; i < len; ++i) {
        int a = vs[i], b = vs[(i + 1) % len];
        if (a == b) continue;
        f.add(g.add_edge(a, b));
      }
    }
    if (!degree_imbalance(g, f).empty()) continue;
    auto comps = eulerian_components(g, f);
    EdgeMultiset total;
    std::set<int> seen;
    for (const auto& st : comps) {
      total.add(st.edges);
      EXPECT_EQ(static_cast<std::int64_t>(st.walk.size()), st.edges.size());
      for (std::size_t i = 0; i < st.walk.size(); ++i) {
        int e = st.walk[i], nx = st.walk[(i + 1) % st.walk.size()];
        EXPECT_EQ(g.edge(e).head, g.edge(nx).tail);
      }
      EXPECT_EQ(g.edge(st.walk[0]).tail, st.vertices[0]);
      for (int v : st.vertices) EXPECT_TRUE(seen.insert(v).second);
    }
    EXPECT_EQ(total, f);
  }
}

TEST(CutConservation, EulerianMultisetsBalanceEveryCut) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 5;
    Digraph g(n);
    EdgeMultiset f;
    for (int c = 0; c < 3; ++c) {
      int a = rng() % n, b = (a + 1 + rng() % (n - 1)) % n;
      f.add(g.add_edge(a, b));
      f.add(g.add_edge(b, a));
    }
    EdgeValues counts(g.num_edges(), Rational(0));
    for (auto [e, c] : f.counts()) counts[e] = c;
    for (int mask = 0; mask < (1 << n); ++mask) {
      VertexSet s;
      for (int v = 0; v < n; ++v) {
        if (mask >> v & 1) s.push_back(v);
      }
      EXPECT_EQ(out_value(g, counts, s), in_value(g, counts, s));
    }
  }
}

TEST(MinCostFlow, SingleForcedEdge) {
  FlowNetwork net;
  net.add_node();
  net.add_node();
  net.add_arc(0, 1, 1, 1, Rational(5));
  net.add_arc(1, 0, 0, 3, Rational(0));
  auto sol = min_cost_integral_flow(net);
  EXPECT_EQ(sol.flow[0], 1);
  EXPECT_EQ(sol.cost, 5);
}

TEST(MinCostFlow, CheaperParallelEdge) {
  FlowNetwork net;
  net.add_node();
  net.add_node();
  net.supply = {1, -1};
  net.add_arc(0, 1, 0, 1, Rational(1));
  net.add_arc(0, 1, 0, 1, Rational(2));
  auto sol = min_cost_integral_flow(net);
  EXPECT_EQ(sol.flow, (std::vector<std::int64_t>{1, 0}));
}

TEST(MinCostFlow, LowerBoundForcesCirculation) {
  FlowNetwork net;
  for (int i = 0; i < 3; ++i) net.add_node();
  net.add_arc(0, 1, 1, 5, Rational(1));
  net.add_arc(1, 2, 0, 5, Rational(1));
  net.add_arc(2, 0, 0, 5, Rational(1));
  auto sol = min_cost_integral_flow(net);
  EXPECT_EQ(sol.flow, (std::vector<std::int64_t>{1, 1, 1}));
  EXPECT_EQ(sol.cost, 3);
}

TEST(MinCostFlow, InfeasibleCarriesCut) {
  FlowNetwork net;
  for (int i = 0; i < 3; ++i) net.add_node();
  net.supply = {2, 0, -2};
  net.add_arc(0, 1, 0, 1, Rational(1));
  net.add_arc(1, 2, 0, 5, Rational(1));
  try {
    min_cost_integral_flow(net);
    FAIL() << "expected infeasibility";
  } catch (const InfeasibleFlow& e) {
    EXPECT_TRUE(std::find(e.cut().begin(), e.cut().end(), 0) != e.cut().end());
    EXPECT_TRUE(std::find(e.cut().begin(), e.cut().end(), 2) == e.cut().end());
  }
}

// The LP relaxation of a network flow has an integral optimum, so the
// integral solver must match the exact simplex optimum.
TEST(MinCostFlow, MatchesLinearProgramOptimum) {
  std::mt19937 rng(21);
  int checked = 0;
  for (int trial = 0; trial < 120; ++trial) {
    int n = 3 + trial % 5;
    FlowNetwork net;
    for (int i = 0; i < n; ++i) net.add_node();
    for (int a = 0; a < 3 * n; ++a) {
      int u = rng() % n, v = rng() % n;
      if (u == v) continue;
      std::int64_t lo = rng() % 3 == 0 ? 1 : 0;
      std::int64_t hi = lo + 1 + rng() % 4;
      Rational cost(static_cast<int>(rng() % 9) - 2, 1 + rng() % 3);
      net.add_arc(u, v, lo, hi, cost);
    }
    for (int i = 0; i + 1 < n; i += 2) {
      std::int64_t s = rng() % 3;
      net.supply[i] += s;
      net.supply[i + 1] -= s;
    }
    LinearProgram lp;
    for (const auto& a : net.arcs) {
      lp.add_variable(a.cost, Rational(a.lower), Rational(a.upper));
    }
    for (int v = 0; v < n; ++v) {
      LPRow row;
      for (std::size_t i = 0; i < net.arcs.size(); ++i) {
        if (net.arcs[i].tail == v) row.coeffs.push_back({static_cast<int>(i), Rational(1)});
        if (net.arcs[i].head == v) row.coeffs.push_back({static_cast<int>(i), Rational(-1)});
      }
      row.sense = RowSense::kEqual;
      row.rhs = net.supply[v];
      lp.add_row(row);
    }
    auto lp_out = solve_lp(lp);
    if (lp_out.status != LPStatus::kOptimal) {
      EXPECT_THROW(min_cost_integral_flow(net), InfeasibleFlow);
      continue;
    }
    auto sol = min_cost_integral_flow(net);
    EXPECT_EQ(sol.cost, lp_out.objective);
    std::vector<std::int64_t> bal(n, 0);
    for (std::size_t i = 0; i < net.arcs.size(); ++i) {
      EXPECT_GE(sol.flow[i], net.arcs[i].lower);
      EXPECT_LE(sol.flow[i], net.arcs[i].upper);
      bal[net.arcs[i].tail] += sol.flow[i];
      bal[net.arcs[i].head] -= sol.flow[i];
    }
    for (int v = 0; v < n; ++v) EXPECT_EQ(bal[v], net.supply[v]);
    ++checked;
  }
  EXPECT_GT(checked, 30);
}

TEST(CycleDecomposition, TwoCyclesSharingAVertex) {
  Digraph g = make_graph(3, {{0, 1}, {1, 0}, {0, 2}, {2, 0}});
  EdgeValues x = {make_rational(1, 2), make_rational(1, 2), make_rational(1, 3), make_rational(1, 3)};
  auto cycles = cycle_decomposition(g, x);
  ASSERT_EQ(cycles.size(), 2u);
  EXPECT_EQ(cycles[0].edges, (std::vector<int>{0, 1}));
  EXPECT_EQ(cycles[0].weight, make_rational(1, 2));
  EXPECT_EQ(cycles[1].edges, (std::vector<int>{2, 3}));
  EXPECT_EQ(cycles[1].weight, make_rational(1, 3));
}

TEST(CycleDecomposition, RejectsNonCirculation) {
  Digraph g = make_graph(2, {{0, 1}, {1, 0}});
  EXPECT_THROW(cycle_decomposition(g, {Rational(1), make_rational(1, 2)}), SolveError);
}

TEST(CycleDecomposition, RecomposesRandomCirculations) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 7);
    Digraph g = random_graph(rng, n, 0.5);
    for (int v = 0; v < n; ++v) g.add_edge(v, (v + 1) % n);
    // Sum of random closed walks with random positive weights.
    EdgeValues x(g.num_edges());
    for (int r = 0; r < 4; ++r) {
      Rational lam = make_rational(1 + static_cast<int>(rng() % 5), 1 + static_cast<int>(rng() % 4));
      int start = static_cast<int>(rng() % n);
      int v = start;
      std::vector<int> walk;
      for (int step = 0; step < 3 * n && (walk.empty() || v != start); ++step) {
        auto outs = g.out_edges(v);
        int e = outs[rng() % outs.size()];
        walk.push_back(e);
        v = g.edge(e).head;
      }
      if (v != start) continue;
      for (int e : walk) x[e] += lam;
    }
    auto cycles = cycle_decomposition(g, x);
    EdgeValues sum(g.num_edges());
    for (const auto& c : cycles) {
      EXPECT_GT(sgn(c.weight), 0);
      std::set<int> tails;
      for (std::size_t k = 0; k < c.edges.size(); ++k) {
        const Edge& e = g.edge(c.edges[k]);
        const Edge& next = g.edge(c.edges[(k + 1) % c.edges.size()]);
        EXPECT_EQ(e.head, next.tail);
        EXPECT_TRUE(tails.insert(e.tail).second) << "cycle is not simple";
        sum[e.id] += c.weight;
      }
    }
    EXPECT_EQ(sum, x);
  }
}

// Minimum over vertex orders of the sum of shortest distances inside u.
std::optional<Rational> brute_force_min_closed_walk(const Digraph& g, const EdgeValues& w, const VertexSet& u) {
  if (u.size() == 1) return Rational(0);
  std::vector<int> order(u.begin() + 1, u.end());
  std::optional<Rational> best;
  do {
    Rational total;
    int at = u.front();
    bool ok = true;
    for (std::size_t k = 0; k <= order.size() && ok; ++k) {
      int to = k < order.size() ? order[k] : u.front();
      auto p = shortest_path(g, w, at, to, u);
      if (!p) ok = false;
      else total += p->weight;
      at = to;
    }
    if (ok && (!best || total < *best)) best = total;
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

TEST(MinClosedWalk, SingletonIsEmpty) {
  Digraph g = make_graph(2, {{0, 1}, {1, 0}});
  auto t = min_closed_walk(g, {Rational(1), Rational(1)}, {1});
  ASSERT_TRUE(t.has_value());
  EXPECT_TRUE(t->walk.empty());
}

TEST(MinClosedWalk, AbsentWhenNotStronglyConnected) {
  Digraph g = make_graph(3, {{0, 1}, {1, 2}, {2, 0}});
  EXPECT_FALSE(min_closed_walk(g, {Rational(1), Rational(1), Rational(1)}, {0, 1}).has_value());
}

TEST(MinClosedWalk, MatchesOrderEnumeration) {
  std::mt19937 rng(5);
  int checked = 0;
  for (int trial = 0; trial < 80; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 7);
    Digraph g = random_graph(rng, n, 0.45);
    EdgeValues w;
    for (int e = 0; e < g.num_edges(); ++e) w.push_back(make_rational(static_cast<int>(rng() % 9), 1 + static_cast<int>(rng() % 3)));
    VertexSet u;
    for (int v = 0; v < n; ++v) {
      if (rng() % 4 != 0) u.push_back(v);
    }
    if (u.empty()) u.push_back(0);
    auto got = min_closed_walk(g, w, u);
    auto want = brute_force_min_closed_walk(g, w, u);
    ASSERT_EQ(got.has_value(), want.has_value());
    if (!got) continue;
    ++checked;
    EXPECT_EQ(multiset_cost(got->edges, w), *want);
    auto in = membership(n, u);
    std::set<int> seen;
    for (const auto& [e, c] : got->edges.counts()) {
      EXPECT_TRUE(in[g.edge(e).tail] && in[g.edge(e).head]);
      seen.insert(g.edge(e).tail);
    }
    if (u.size() > 1) EXPECT_EQ(seen.size(), u.size());
    EXPECT_TRUE(degree_imbalance(g, got->edges).empty());
  }
  EXPECT_GT(checked, 20);
}

}  // namespace
}  // namespace atsp
