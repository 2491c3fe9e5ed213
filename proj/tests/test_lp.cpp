#include <gtest/gtest.h>

#include <random>

#include "atsp/lp.hpp"

namespace atsp {
namespace {

LPRow row(std::vector<std::pair<int, Rational>> coeffs, RowSense sense, Rational rhs) {
  return LPRow{std::move(coeffs), sense, std::move(rhs)};
}

// Checks primal feasibility, strong duality, dual sign rules and
// complementary slackness for an optimal outcome.
void expect_certified(const LinearProgram& lp, const LPOutcome& out) {
  ASSERT_EQ(out.status, LPStatus::kOptimal);
  EXPECT_TRUE(primal_feasible(lp, out.primal));
  EXPECT_EQ(dual_objective(lp, out), out.objective);
  const bool minimize = lp.sense == ObjectiveSense::kMinimize;
  for (std::size_t i = 0; i < lp.rows.size(); ++i) {
    const LPRow& r = lp.rows[i];
    int s = sgn(out.dual[i]) * (minimize ? 1 : -1);
    if (r.sense == RowSense::kGreaterEqual) EXPECT_GE(s, 0);
    if (r.sense == RowSense::kLessEqual) EXPECT_LE(s, 0);
    Rational lhs = 0;
    for (const auto& [j, a] : r.coeffs) lhs += a * out.primal[j];
    if (sgn(out.dual[i]) != 0) EXPECT_EQ(lhs, r.rhs) << "slack row " << i << " has a dual";
  }
  for (std::size_t j = 0; j < lp.variables.size(); ++j) {
    const Rational& d = out.reduced_cost[j];
    if (sgn(d) == 0) continue;
    const auto& v = lp.variables[j];
    bool at_lower = v.lower && out.primal[j] == *v.lower;
    bool at_upper = v.upper && out.primal[j] == *v.upper;
    EXPECT_TRUE(at_lower || at_upper) << "basic-looking variable " << j << " has reduced cost";
  }
}

TEST(Simplex, MaximizeSimplex) {
  LinearProgram lp;
  lp.sense = ObjectiveSense::kMaximize;
  lp.add_variable(Rational(1));
  lp.add_variable(Rational(1));
  lp.add_row(row({{0, 1}, {1, 1}}, RowSense::kLessEqual, Rational(1)));
  auto out = solve_lp(lp);
  EXPECT_EQ(out.objective, 1);
  expect_certified(lp, out);
}

TEST(Simplex, ExactThirds) {
  LinearProgram lp;
  lp.add_variable(Rational(0));
  lp.add_row(row({{0, 3}}, RowSense::kEqual, Rational(1)));
  auto out = solve_lp(lp);
  ASSERT_EQ(out.status, LPStatus::kOptimal);
  EXPECT_EQ(out.primal[0], Rational(1, 3));
}

TEST(Simplex, InfeasibleBox) {
  LinearProgram lp;
  lp.add_variable(Rational(0), std::nullopt, std::nullopt);
  lp.add_row(row({{0, 1}}, RowSense::kLessEqual, Rational(0)));
  lp.add_row(row({{0, 1}}, RowSense::kGreaterEqual, Rational(1)));
  auto out = solve_lp(lp);
  EXPECT_EQ(out.status, LPStatus::kInfeasible);
  EXPECT_TRUE(certifies_infeasibility(lp, out.farkas));
}

TEST(Simplex, Unbounded) {
  LinearProgram lp;
  lp.sense = ObjectiveSense::kMaximize;
  lp.add_variable(Rational(1));
  lp.add_variable(Rational(0));
  lp.add_row(row({{0, 1}, {1, -1}}, RowSense::kLessEqual, Rational(2)));
  EXPECT_EQ(solve_lp(lp).status, LPStatus::kUnbounded);
}

TEST(Simplex, FreeAndBoundedVariables) {
  // min x - y, x free, -2 <= y <= 3, x >= y - 1, x + y >= -4.
  LinearProgram lp;
  lp.add_variable(Rational(1), std::nullopt, std::nullopt);
  lp.add_variable(Rational(-1), Rational(-2), Rational(3));
  lp.add_row(row({{0, 1}, {1, -1}}, RowSense::kGreaterEqual, Rational(-1)));
  lp.add_row(row({{0, 1}, {1, 1}}, RowSense::kGreaterEqual, Rational(-4)));
  auto out = solve_lp(lp);
  EXPECT_EQ(out.objective, -1);
  expect_certified(lp, out);
}

TEST(Simplex, RedundantRowKeepsObjective) {
  LinearProgram lp;
  lp.sense = ObjectiveSense::kMaximize;
  lp.add_variable(Rational(2));
  lp.add_variable(Rational(3));
  lp.add_row(row({{0, 1}, {1, 2}}, RowSense::kLessEqual, Rational(4)));
  lp.add_row(row({{0, 3}, {1, 1}}, RowSense::kLessEqual, Rational(6)));
  SimplexSolver s(lp);
  auto first = s.solve();
  auto second = s.add_row_and_resolve(row({{0, 1}}, RowSense::kLessEqual, Rational(100)));
  EXPECT_EQ(first.objective, second.objective);
  expect_certified(s.program(), second);
}

TEST(Simplex, ViolatedCutWorsensObjective) {
  LinearProgram lp;
  lp.add_variable(Rational(1));
  lp.add_variable(Rational(2));
  lp.add_row(row({{0, 1}, {1, 1}}, RowSense::kGreaterEqual, Rational(2)));
  SimplexSolver s(lp);
  auto first = s.solve();
  EXPECT_EQ(first.objective, 2);
  auto second = s.add_row_and_resolve(row({{1, 1}}, RowSense::kGreaterEqual, Rational(1)));
  EXPECT_EQ(second.objective, 3);
  expect_certified(s.program(), second);
}

TEST(Simplex, RowMakingInfeasible) {
  LinearProgram lp;
  lp.add_variable(Rational(1));
  lp.add_row(row({{0, 1}}, RowSense::kGreaterEqual, Rational(2)));
  SimplexSolver s(lp);
  s.solve();
  auto out = s.add_row_and_resolve(row({{0, 1}}, RowSense::kLessEqual, Rational(1)));
  EXPECT_EQ(out.status, LPStatus::kInfeasible);
  EXPECT_TRUE(certifies_infeasibility(s.program(), out.farkas));
}

LinearProgram random_lp(std::mt19937& rng, int nvars, int nrows) {
  LinearProgram lp;
  lp.sense = rng() % 2 ? ObjectiveSense::kMinimize : ObjectiveSense::kMaximize;
  for (int j = 0; j < nvars; ++j) {
    int kind = rng() % 4;
    std::optional<Rational> lo = Rational(static_cast<int>(rng() % 5) - 2);
    std::optional<Rational> hi = *lo + Rational(static_cast<int>(rng() % 6));
    if (kind == 1) hi.reset();
    if (kind == 2) lo.reset();
    lp.add_variable(make_rational(static_cast<int>(rng() % 11) - 5, 1 + rng() % 3), lo, hi);
  }
  for (int i = 0; i < nrows; ++i) {
    LPRow r;
    for (int j = 0; j < nvars; ++j) {
      if (rng() % 2) r.coeffs.push_back({j, Rational(static_cast<int>(rng() % 7) - 3)});
    }
    int s = rng() % 5;
    r.sense = s == 0 ? RowSense::kEqual : (s < 3 ? RowSense::kLessEqual : RowSense::kGreaterEqual);
    r.rhs = make_rational(static_cast<int>(rng() % 13) - 6, 1 + rng() % 2);
    lp.add_row(r);
  }
  return lp;
}

TEST(Simplex, RandomProgramsAreCertified) {
  std::mt19937 rng(42);
  int optimal = 0, infeasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    LinearProgram lp = random_lp(rng, 2 + trial % 5, 1 + trial % 6);
    auto out = solve_lp(lp);
    if (out.status == LPStatus::kOptimal) {
      ++optimal;
      expect_certified(lp, out);
    } else if (out.status == LPStatus::kInfeasible) {
      ++infeasible;
      EXPECT_TRUE(certifies_infeasibility(lp, out.farkas));
    }
    auto again = solve_lp(lp);
    EXPECT_EQ(again.status, out.status);
    EXPECT_EQ(again.primal, out.primal);
    EXPECT_EQ(again.dual, out.dual);
  }
  EXPECT_GT(optimal, 50);
  EXPECT_GT(infeasible, 10);
}

TEST(Simplex, WarmStartMatchesColdSolve) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    LinearProgram lp = random_lp(rng, 2 + trial % 4, 1 + trial % 4);
    SimplexSolver warm(lp);
    warm.solve();
    for (int extra = 0; extra < 3; ++extra) {
      LinearProgram one_row = random_lp(rng, static_cast<int>(lp.variables.size()), 1);
      LPRow r = one_row.rows[0];
      if (r.sense == RowSense::kEqual) r.sense = RowSense::kGreaterEqual;
      auto w = warm.add_row_and_resolve(r);
      lp.add_row(r);
      auto c = solve_lp(lp);
      ASSERT_EQ(w.status, c.status);
      if (c.status == LPStatus::kOptimal) {
        EXPECT_EQ(w.objective, c.objective);
        expect_certified(lp, w);
      } else if (c.status == LPStatus::kInfeasible) {
        EXPECT_TRUE(certifies_infeasibility(lp, w.farkas));
      }
    }
  }
}

}  // namespace
}  // namespace atsp
