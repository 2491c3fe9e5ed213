#include <gtest/gtest.h>

#include <random>

#include "atsp/errors.hpp"
#include "atsp/instance.hpp"

namespace atsp {
namespace {

Digraph complete(int n) {
  Digraph g(n);
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u != v) g.add_edge(u, v);
    }
  }
  return g;
}

Instance k3_instance() {
  Digraph g = complete(3);
  EdgeValues w(g.num_edges(), Rational(1));
  HeldKarpSolution hk = solve_held_karp(g, w);
  return build_instance(g, w, hk, extract_laminar_dual(g, w, hk));
}

TEST(Instance, K3IsSingletonWithUnitWeights) {
  Instance inst = k3_instance();
  EXPECT_TRUE(is_singleton(inst));
  EXPECT_TRUE(verify_instance(inst).empty());
  for (const Edge& e : inst.graph().edges()) EXPECT_EQ(induced_weight(inst, e.id), 1);
  EXPECT_EQ(total_value(inst), 3);
  EXPECT_EQ(lb_bar(inst, {}), 3);
  EXPECT_EQ(lb_bar(inst, {0, 1, 2}), 0);
  EXPECT_EQ(value(inst, {0}), 0);
  EXPECT_EQ(value(inst, {0, 1}), 2);
}

TEST(Instance, AlphaShiftIsInvisible) {
  Digraph g = complete(3);
  EdgeValues w(g.num_edges(), Rational(1));
  HeldKarpSolution hk = solve_held_karp(g, w);
  DualSolution d = extract_laminar_dual(g, w, hk);
  Instance a = build_instance(g, w, hk, d);
  for (auto& v : d.alpha) v += 7;
  Instance b = build_instance(g, w, hk, d);
  EXPECT_EQ(a.weights(), b.weights());
  EXPECT_EQ(instance_to_json(a), instance_to_json(b));
}

TEST(Instance, ZeroEdgesAreDropped) {
  Digraph g(3);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 0);
  g.add_edge(0, 2);  // expensive chord, x = 0 at the optimum
  EdgeValues w = {1, 1, 1, 50};
  HeldKarpSolution hk = solve_held_karp(g, w);
  Instance inst = build_instance(g, w, hk, extract_laminar_dual(g, w, hk));
  EXPECT_EQ(inst.graph().num_edges(), 3);
  for (const Edge& e : inst.graph().edges()) EXPECT_NE(*e.preimage, 3);
}

TEST(Instance, InconsistentDualIsRejected) {
  Digraph g = complete(3);
  EdgeValues w(g.num_edges(), Rational(1));
  HeldKarpSolution hk = solve_held_karp(g, w);
  DualSolution d = extract_laminar_dual(g, w, hk);
  d.alpha[1] += 1;
  EXPECT_THROW(build_instance(g, w, hk, d), SolveError);
}

TEST(Instance, WeightSumsCrossedSets) {
  Digraph g(4);
  int e = g.add_edge(0, 3);
  int inner = g.add_edge(0, 1);
  LaminarForest lam(4, {{{0}, Rational(1)}, {{0, 1}, Rational(2)}, {{0, 1, 2}, Rational(4)}});
  Instance inst(g, EdgeValues(2, Rational(1)), lam);
  EXPECT_EQ(induced_weight(inst, e), 1 + 2 + 4);
  EXPECT_EQ(induced_weight(inst, inner), 1);
  EXPECT_EQ(cost(inst, EdgeMultiset()), 0);
  EXPECT_EQ(lam.chain(0), (std::vector<int>{2, 1, 0}));
  EXPECT_EQ(lam.set(2).parent, 1);
  EXPECT_EQ(*lam.find({0, 1}), 1);
}

TEST(Instance, CrossingFamilyIsRejected) {
  EXPECT_THROW(LaminarForest(3, {{{0, 1}, Rational(1)}, {{1, 2}, Rational(1)}}), SolveError);
}

TEST(Instance, NonTightSetIsReported) {
  Digraph g(3);
  for (int v = 0; v < 3; ++v) {
    g.add_edge(v, (v + 1) % 3);
    g.add_edge((v + 1) % 3, v);
  }
  LaminarForest lam(3, {{{0}, Rational(1)}});
  Instance inst(g, EdgeValues(6, Rational(1)), lam);
  auto problems = verify_instance(inst);
  ASSERT_FALSE(problems.empty());
  EXPECT_NE(problems.front().find("tightness"), std::string::npos);
}

TEST(Instance, EntryPoints) {
  Digraph g(4);
  g.add_edge(3, 0);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 3);
  Instance inst(g, EdgeValues(4, Rational(1)), LaminarForest(4, {}));
  EXPECT_EQ(s_in(inst, {0, 1, 2}), VertexSet({0}));
  EXPECT_EQ(s_out(inst, {0, 1, 2}), VertexSet({2}));
}

TEST(Instance, JsonRoundTrip) {
  Instance inst = k3_instance();
  auto j = instance_to_json(inst);
  Instance back = instance_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(instance_to_json(back), j);
  j["edges"][0]["x"] = "1/0x";
  EXPECT_THROW(instance_from_json(j), ParseError);
}

Digraph random_strong(std::mt19937& rng, int n, EdgeValues& w) {
  Digraph g(n);
  for (int i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n);
  int extra = rng() % (2 * n * n);
  for (int k = 0; k < extra; ++k) {
    int u = rng() % n, v = rng() % n;
    if (u != v) g.add_edge(u, v);
  }
  w.clear();
  for (int e = 0; e < g.num_edges(); ++e) w.push_back(Rational(static_cast<int>(rng() % 21)));
  return g;
}

TEST(InstanceProperty, RandomBuiltInstances) {
  std::mt19937 rng(3);
  int non_singleton = 0;
  for (int trial = 0; trial < 60; ++trial) {
    EdgeValues w;
    Digraph g = random_strong(rng, 3 + trial % 6, w);
    HeldKarpSolution hk = solve_held_karp(g, w);
    Instance inst = build_instance(g, w, hk, extract_laminar_dual(g, w, hk));
    EXPECT_TRUE(verify_instance(inst).empty());
    EXPECT_EQ(total_value(inst), hk.value);
    // Re-solving with the induced weights recovers the same bound.
    EXPECT_EQ(solve_held_karp(inst.graph(), inst.weights()).value, total_value(inst));
    Rational bar = lb_bar(inst, {});
    EXPECT_LE(bar, total_value(inst));
    EXPECT_EQ(bar == total_value(inst), is_singleton(inst));
    if (!is_singleton(inst)) ++non_singleton;
    for (int k = 0; k < 5; ++k) {
      EdgeMultiset f;
      for (int e = 0; e < inst.graph().num_edges(); ++e) f.add(e, rng() % 3);
      EXPECT_EQ(cost(inst, f), cost_by_crossings(inst, f));
    }
  }
  EXPECT_GT(non_singleton, 0);
}

}  // namespace
}  // namespace atsp
