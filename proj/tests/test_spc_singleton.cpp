#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "atsp/errors.hpp"
#include "atsp/gadgets.hpp"
#include "atsp/spc_singleton.hpp"

using namespace atsp;

namespace {

Instance k3_singleton() {
  return instance_from_cycles(
      3, {{{0, 1, 2}, make_rational(1, 2)}, {{0, 2, 1}, make_rational(1, 2)}},
      {{{0}, make_rational(1, 2)}, {{1}, make_rational(1, 2)}, {{2}, make_rational(1, 2)}});
}

// Both antipodal pairs {0,2} and {1,3} carry an internal 2-cycle.
Instance antipodal_square() {
  return instance_from_cycles(
      4, {{{0, 2, 1, 3}, make_rational(1, 2)}, {{2, 0, 3, 1}, make_rational(1, 2)}},
      {{{0}, Rational(1)}, {{1}, Rational(1)}, {{2}, Rational(1)}, {{3}, Rational(1)}});
}

std::int64_t out_degree(const Digraph& g, const EdgeMultiset& f, int v) {
  std::int64_t d = 0;
  for (int e : g.out_edges(v)) d += f.count(e);
  return d;
}

std::int64_t leaving(const Digraph& g, const EdgeMultiset& f, const VertexSet& s) {
  auto in = membership(g.num_vertices(), s);
  std::int64_t d = 0;
  for (const auto& [e, c] : f.counts()) {
    if (in[g.edge(e).tail] && !in[g.edge(e).head]) d += c;
  }
  return d;
}

// Convex combination of random Hamiltonian cycles: every cut is crossed and
// every singleton is tight. Some vertices get y = 0.
Instance random_singleton(std::mt19937& rng, int n) {
  std::uniform_int_distribution<int> ncyc(1, 3), wt(1, 4), yv(0, 3);
  int c = ncyc(rng);
  std::vector<int> parts;
  for (int i = 0; i < c; ++i) parts.push_back(wt(rng));
  int total = std::accumulate(parts.begin(), parts.end(), 0);
  std::vector<WeightedCycle> cycles;
  for (int i = 0; i < c; ++i) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    cycles.push_back({perm, make_rational(parts[i], total)});
  }
  std::vector<std::pair<VertexSet, Rational>> lam;
  for (int v = 0; v < n; ++v) lam.push_back({{v}, Rational(yv(rng))});
  return instance_from_cycles(n, cycles, lam);
}

std::vector<VertexSet> random_partition(std::mt19937& rng, const Instance& inst) {
  const int n = inst.num_vertices();
  std::uniform_int_distribution<int> groups(2, std::max(2, n));
  int k = groups(rng);
  std::vector<VertexSet> raw(k);
  std::uniform_int_distribution<int> pick(0, k - 1);
  for (int v = 0; v < n; ++v) raw[pick(rng)].push_back(v);
  std::vector<VertexSet> out;
  for (const VertexSet& grp : raw) {
    if (grp.empty()) continue;
    if (static_cast<int>(grp.size()) == n) {
      for (int v : grp) out.push_back({v});
      continue;
    }
    for (VertexSet& comp : scc_topological(inst.graph(), grp)) out.push_back(std::move(comp));
  }
  return out;
}

}  // namespace

TEST(SpcSingleton, K3SingletonPartitionGivesDirectedTriangle) {
  Instance inst = k3_singleton();
  const Digraph& g = inst.graph();
  EdgeMultiset f = solve_spc_singleton(inst, {{0}, {1}, {2}});
  EXPECT_EQ(f.size(), 3);
  for (int v = 0; v < 3; ++v) EXPECT_EQ(out_degree(g, f, v), 1);
  auto comps = eulerian_components(g, f);
  ASSERT_EQ(comps.size(), 1u);
  EXPECT_EQ(comps[0].vertices, (VertexSet{0, 1, 2}));
  EXPECT_EQ(cost(inst, f), 3);
}

TEST(SpcSingleton, RejectsClassEqualToV) {
  try {
    solve_spc_singleton(k3_singleton(), {{0, 1, 2}});
    FAIL() << "expected SolveError";
  } catch (const SolveError& e) {
    EXPECT_NE(std::string(e.what()).find("partition class equals V"), std::string::npos);
  }
}

TEST(SpcSingleton, RejectsClassNotStronglyConnected) {
  // 0 and 1 of the square have no edge between them.
  try {
    solve_spc_singleton(antipodal_square(), {{0, 1}, {2}, {3}});
    FAIL() << "expected SolveError";
  } catch (const SolveError& e) {
    EXPECT_NE(std::string(e.what()).find("invalid partition"), std::string::npos);
  }
}

TEST(SpcSingleton, RejectsMalformedPartitions) {
  Instance inst = k3_singleton();
  EXPECT_THROW(solve_spc_singleton(inst, {{0}, {1}}), SolveError);
  EXPECT_THROW(solve_spc_singleton(inst, {{0, 1}, {1}, {2}}), SolveError);
  EXPECT_THROW(solve_spc_singleton(inst, {{0}, {1}, {2}, {}}), SolveError);
  EXPECT_THROW(solve_spc_singleton(inst, {{0}, {1}, {5}}), SolveError);
}

TEST(SpcSingleton, RejectsNonSingletonInstance) {
  Gadget gd = series_scc_gadget();
  std::vector<VertexSet> part;
  for (int v = 0; v < gd.inst.num_vertices(); ++v) part.push_back({v});
  EXPECT_THROW(solve_spc_singleton(gd.inst, part), SolveError);
}

TEST(SpcSingleton, AntipodalPairsBothCrossed) {
  Instance inst = antipodal_square();
  const Digraph& g = inst.graph();
  std::vector<VertexSet> part = {{0, 2}, {1, 3}};
  SpcSingletonStats stats;
  EdgeMultiset f = solve_spc_singleton(inst, part, &stats);
  EXPECT_TRUE(degree_imbalance(g, f).empty());
  EXPECT_GE(leaving(g, f, part[0]), 1);
  EXPECT_GE(leaving(g, f, part[1]), 1);
  for (int v = 0; v < 4; ++v) EXPECT_LE(out_degree(g, f, v), 2);
  EXPECT_EQ(stats.repair_lengths.size(), 2u);
  EXPECT_TRUE(check_lightness(inst, {}, f, Rational(2), Rational(0)).ok);
}

TEST(SpcSingleton, ZeroYVertexMayBeVisitedOften) {
  // y_0 = 0: edges at vertex 0 are cheap and uncapped in the rounding.
  Instance inst = instance_from_cycles(
      3, {{{0, 1, 2}, make_rational(1, 2)}, {{0, 2, 1}, make_rational(1, 2)}},
      {{{1}, Rational(1)}, {{2}, Rational(1)}});
  EdgeMultiset f = solve_spc_singleton(inst, {{0}, {1}, {2}});
  EXPECT_TRUE(uncovered_classes(inst.graph(), f, {{0}, {1}, {2}}).empty());
  EXPECT_TRUE(check_lightness(inst, {}, f, Rational(2), Rational(0)).ok);
}

TEST(Lightness, DetectsHeavySubtourAndBackboneExcess) {
  Instance inst = k3_singleton();
  const Digraph& g = inst.graph();
  EdgeMultiset two_cycle;
  for (const Edge& e : g.edges()) {
    if ((e.tail == 0 && e.head == 1) || (e.tail == 1 && e.head == 0)) two_cycle.add(e.id);
  }
  // w = 2, lb = 2.
  EXPECT_TRUE(check_lightness(inst, {}, two_cycle, Rational(1), Rational(0)).ok);
  auto bad = check_lightness(inst, {}, two_cycle, make_rational(1, 2), Rational(0));
  EXPECT_FALSE(bad.ok);
  ASSERT_TRUE(bad.offending.has_value());
  EXPECT_EQ(bad.offending->vertices, (VertexSet{0, 1}));
  auto meets = check_lightness(inst, {0}, two_cycle, Rational(0), Rational(2));
  EXPECT_TRUE(meets.ok);
  EXPECT_EQ(meets.backbone_weight, 2);
  EXPECT_FALSE(check_lightness(inst, {0}, two_cycle, Rational(0), Rational(1)).ok);
  EdgeMultiset path;
  path.add(two_cycle.counts().begin()->first);
  EXPECT_FALSE(check_lightness(inst, {}, path, Rational(9), Rational(9)).ok);
}

TEST(SpcSingletonProperty, RandomInstancesMeetEveryGuarantee) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 80; ++trial) {
    const int n = 2 + trial % 9;
    Instance inst = random_singleton(rng, n);
    ASSERT_TRUE(verify_instance(inst).empty());
    std::vector<VertexSet> part = random_partition(rng, inst);
    const Digraph& g = inst.graph();
    EdgeMultiset f = solve_spc_singleton(inst, part);
    ASSERT_TRUE(degree_imbalance(g, f).empty()) << trial;
    for (const VertexSet& cls : part) EXPECT_GE(leaving(g, f, cls), 1) << trial;
    for (int v = 0; v < n; ++v) {
      if (sgn(inst.laminar().singleton_y(v)) > 0) EXPECT_LE(out_degree(g, f, v), 2) << trial;
    }
    // Lightness recomputed set by set, independently of the solver's audit.
    for (const Subtour& t : eulerian_components(g, f)) {
      Rational lbt = 0;
      for (int v : t.vertices) lbt += 2 * inst.laminar().singleton_y(v);
      EXPECT_LE(cost_by_crossings(inst, t.edges), 2 * lbt) << trial;
    }
  }
}

TEST(SpcSingletonProperty, GeneratedSingletonInstancesAreValid) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    Instance inst = random_singleton_instance(rng, 3 + trial % 8);
    EXPECT_TRUE(verify_instance(inst).empty());
    EXPECT_TRUE(is_singleton(inst));
    EXPECT_GT(total_value(inst), 0);
    auto part = random_scc_partition(rng, inst, {});
    EdgeMultiset f = solve_spc_singleton(inst, part);
    EXPECT_TRUE(uncovered_classes(inst.graph(), f, part).empty());
    EXPECT_TRUE(check_lightness(inst, {}, f, 2, 0).ok);
  }
}
