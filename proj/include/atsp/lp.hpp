#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "atsp/rational.hpp"

namespace atsp {

enum class ObjectiveSense { kMinimize, kMaximize };
enum class RowSense { kLessEqual, kEqual, kGreaterEqual };
enum class LPStatus { kOptimal, kInfeasible, kUnbounded };

struct LPVariable {
  Rational cost;
  std::optional<Rational> lower = Rational(0);  // absent = -infinity
  std::optional<Rational> upper;                 // absent = +infinity
};

struct LPRow {
  std::vector<std::pair<int, Rational>> coeffs;  // (variable, coefficient)
  RowSense sense = RowSense::kLessEqual;
  Rational rhs;
};

// Variable and row ids are assigned in insertion order and never change.
struct LinearProgram {
  ObjectiveSense sense = ObjectiveSense::kMinimize;
  std::vector<LPVariable> variables;
  std::vector<LPRow> rows;

  int add_variable(Rational cost, std::optional<Rational> lower = Rational(0),
                   std::optional<Rational> upper = std::nullopt);
  int add_row(LPRow row);
};

// Dual values follow the textbook sign convention for the stated sense:
// for a minimization, y >= 0 on >= rows and y <= 0 on <= rows, and
// reduced_cost = c - A^T y. Maximization flips both signs.
//
// On infeasibility `farkas` holds one multiplier per row with y >= 0 on >=
// rows and y <= 0 on <= rows such that max over the variable box of
// (y^T A) x is strictly below y^T b.
struct LPOutcome {
  LPStatus status = LPStatus::kInfeasible;
  std::vector<Rational> primal;
  std::vector<Rational> dual;
  std::vector<Rational> reduced_cost;
  std::vector<Rational> farkas;
  Rational objective;
  long pivots = 0;
};

// Dense-tableau simplex over exact rationals with Bland's rule in both the
// primal and dual phases. Keeps its basis between calls so rows can be
// appended and re-optimized by dual simplex.
class SimplexSolver {
 public:
  explicit SimplexSolver(LinearProgram lp);
  ~SimplexSolver();
  SimplexSolver(SimplexSolver&&) noexcept;
  SimplexSolver& operator=(SimplexSolver&&) noexcept;

  LPOutcome solve();
  // Equivalent to solving from scratch with `row` appended.
  LPOutcome add_row_and_resolve(LPRow row);

  const LinearProgram& program() const;
  long total_pivots() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

LPOutcome solve_lp(const LinearProgram& lp);

// Independent audits used by tests and assertions.
bool primal_feasible(const LinearProgram& lp, const std::vector<Rational>& x);
Rational dual_objective(const LinearProgram& lp, const LPOutcome& out);
bool certifies_infeasibility(const LinearProgram& lp, const std::vector<Rational>& y);

}  // namespace atsp
