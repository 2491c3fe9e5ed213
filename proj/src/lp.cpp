#include "atsp/lp.hpp"

#include <algorithm>

#include "atsp/errors.hpp"

namespace atsp {

int LinearProgram::add_variable(Rational cost, std::optional<Rational> lower,
                                std::optional<Rational> upper) {
  variables.push_back(LPVariable{std::move(cost), std::move(lower), std::move(upper)});
  return static_cast<int>(variables.size()) - 1;
}

int LinearProgram::add_row(LPRow row) {
  rows.push_back(std::move(row));
  return static_cast<int>(rows.size()) - 1;
}

namespace {

// How an original variable is expressed through nonnegative columns.
enum class VarKind { kShiftLower, kFlipUpper, kFree };

struct VarMap {
  VarKind kind = VarKind::kShiftLower;
  int col = -1;
  int col_neg = -1;  // second column of a free variable
  Rational offset;   // lower bound (shift) or upper bound (flip)
};

}  // namespace

// Internal form: min c'x' subject to T x' = rhs, x' >= 0, rhs >= 0 on every
// row. Each row owns a unit column (its slack, or its artificial when it has
// no slack) whose tableau column, scaled by `unit_sign`, is a column of B^-1.
struct SimplexSolver::Impl {
  LinearProgram lp;
  std::vector<VarMap> vars;

  std::vector<Rational> cost;  // phase-two cost per column
  std::vector<char> artificial;
  int ncols = 0;

  std::vector<std::vector<Rational>> T;
  std::vector<Rational> rhs;
  std::vector<int> basis;
  std::vector<int> unit_col;
  std::vector<int> unit_sign;
  std::vector<char> negated;
  std::vector<int> orig_row;  // original row id, or -1 for a bound row

  std::vector<Rational> d;  // reduced costs
  Rational z;               // internal objective value
  bool optimal = false;
  long pivots = 0;

  int new_column(const Rational& c, bool art) {
    for (auto& row : T) row.emplace_back(0);
    cost.push_back(c);
    artificial.push_back(art ? 1 : 0);
    d.emplace_back(0);
    return ncols++;
  }

  // Expresses an original row in internal columns; returns the adjusted rhs.
  Rational internal_row(const LPRow& row, std::vector<Rational>& out) const {
    out.assign(ncols, Rational(0));
    Rational b = row.rhs;
    for (const auto& [j, a] : row.coeffs) {
      const VarMap& vm = vars.at(j);
      switch (vm.kind) {
        case VarKind::kShiftLower:
          out[vm.col] += a;
          b -= a * vm.offset;
          break;
        case VarKind::kFlipUpper:
          out[vm.col] -= a;
          b -= a * vm.offset;
          break;
        case VarKind::kFree:
          out[vm.col] += a;
          out[vm.col_neg] -= a;
          break;
      }
    }
    return b;
  }

  void build() {
    vars.clear();
    cost.clear();
    artificial.clear();
    T.clear();
    rhs.clear();
    basis.clear();
    unit_col.clear();
    unit_sign.clear();
    negated.clear();
    orig_row.clear();
    d.clear();
    ncols = 0;
    optimal = false;

    const Rational sign = lp.sense == ObjectiveSense::kMinimize ? 1 : -1;
    for (const LPVariable& v : lp.variables) {
      VarMap vm;
      if (v.lower) {
        vm.kind = VarKind::kShiftLower;
        vm.offset = *v.lower;
        vm.col = ncols++;
        cost.push_back(sign * v.cost);
      } else if (v.upper) {
        vm.kind = VarKind::kFlipUpper;
        vm.offset = *v.upper;
        vm.col = ncols++;
        cost.push_back(-sign * v.cost);
      } else {
        vm.kind = VarKind::kFree;
        vm.col = ncols++;
        vm.col_neg = ncols++;
        cost.push_back(sign * v.cost);
        cost.push_back(-sign * v.cost);
      }
      vars.push_back(vm);
    }
    artificial.assign(ncols, 0);

    // Rows before slack/artificial columns exist: coefficients, rhs, sense.
    struct Pending {
      std::vector<Rational> coef;
      Rational b;
      RowSense sense;
      int orig;
    };
    std::vector<Pending> pending;
    for (std::size_t i = 0; i < lp.rows.size(); ++i) {
      Pending p;
      p.b = internal_row(lp.rows[i], p.coef);
      p.sense = lp.rows[i].sense;
      p.orig = static_cast<int>(i);
      pending.push_back(std::move(p));
    }
    for (std::size_t j = 0; j < vars.size(); ++j) {
      const LPVariable& v = lp.variables[j];
      if (v.lower && v.upper) {
        Pending p;
        p.coef.assign(ncols, Rational(0));
        p.coef[vars[j].col] = 1;
        p.b = *v.upper - *v.lower;
        p.sense = RowSense::kLessEqual;
        p.orig = -1;
        pending.push_back(std::move(p));
      }
    }

    const int m = static_cast<int>(pending.size());
    T.resize(m);
    for (int i = 0; i < m; ++i) {
      T[i] = std::move(pending[i].coef);
      rhs.push_back(pending[i].b);
      orig_row.push_back(pending[i].orig);
    }
    d.assign(ncols, Rational(0));
    unit_col.assign(m, -1);
    unit_sign.assign(m, 1);
    negated.assign(m, 0);
    basis.assign(m, -1);

    for (int i = 0; i < m; ++i) {
      int slack_coef = 0;
      if (pending[i].sense == RowSense::kLessEqual) slack_coef = 1;
      if (pending[i].sense == RowSense::kGreaterEqual) slack_coef = -1;
      int slack = -1;
      if (slack_coef != 0) {
        slack = new_column(Rational(0), false);
        T[i][slack] = slack_coef;
      }
      if (sgn(rhs[i]) < 0) {
        negated[i] = 1;
        for (auto& a : T[i]) a = -a;
        rhs[i] = -rhs[i];
        slack_coef = -slack_coef;
      }
      if (slack >= 0) {
        unit_col[i] = slack;
        unit_sign[i] = slack_coef;
      }
      if (slack_coef == 1) {
        basis[i] = slack;
      } else {
        int art = new_column(Rational(0), true);
        T[i][art] = 1;
        basis[i] = art;
        if (slack < 0) {
          unit_col[i] = art;
          unit_sign[i] = 1;
        }
      }
    }
  }

  void pivot(int r, int j) {
    ++pivots;
    std::vector<Rational>& pr = T[r];
    const Rational inv = 1 / pr[j];
    std::vector<int> nz;
    for (int k = 0; k < ncols; ++k) {
      if (sgn(pr[k]) != 0) {
        pr[k] *= inv;
        nz.push_back(k);
      }
    }
    rhs[r] *= inv;
    Rational f;
    for (int i = 0; i < static_cast<int>(T.size()); ++i) {
      if (i == r || sgn(T[i][j]) == 0) continue;
      f = T[i][j];
      std::vector<Rational>& row = T[i];
      for (int k : nz) row[k] -= f * pr[k];
      rhs[i] -= f * rhs[r];
    }
    if (sgn(d[j]) != 0) {
      f = d[j];
      for (int k : nz) d[k] -= f * pr[k];
      z += f * rhs[r];
    }
    basis[r] = j;
  }

  void price(const std::vector<Rational>& c) {
    d = c;
    z = 0;
    for (std::size_t r = 0; r < T.size(); ++r) {
      const Rational& cb = c[basis[r]];
      if (sgn(cb) == 0) continue;
      for (int k = 0; k < ncols; ++k) {
        if (sgn(T[r][k]) != 0) d[k] -= cb * T[r][k];
      }
      z += cb * rhs[r];
    }
  }

  // Primal simplex with Bland's rule. Returns false when unbounded.
  bool primal_simplex(bool allow_artificial) {
    std::vector<char> is_basic(ncols, 0);
    for (int b : basis) is_basic[b] = 1;
    while (true) {
      int enter = -1;
      for (int k = 0; k < ncols; ++k) {
        if (is_basic[k] || (!allow_artificial && artificial[k])) continue;
        if (sgn(d[k]) < 0) {
          enter = k;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      Rational best;
      for (int r = 0; r < static_cast<int>(T.size()); ++r) {
        if (sgn(T[r][enter]) <= 0) continue;
        Rational ratio = rhs[r] / T[r][enter];
        if (leave < 0 || ratio < best || (ratio == best && basis[r] < basis[leave])) {
          leave = r;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      is_basic[basis[leave]] = 0;
      is_basic[enter] = 1;
      pivot(leave, enter);
    }
  }

  // Dual simplex with smallest-index choices. Returns the row proving
  // infeasibility, or -1 once the basis is primal feasible.
  int dual_simplex() {
    std::vector<char> is_basic(ncols, 0);
    for (int b : basis) is_basic[b] = 1;
    while (true) {
      int leave = -1;
      for (int r = 0; r < static_cast<int>(T.size()); ++r) {
        if (sgn(rhs[r]) < 0 && (leave < 0 || basis[r] < basis[leave])) leave = r;
      }
      if (leave < 0) return -1;
      int enter = -1;
      Rational best;
      for (int k = 0; k < ncols; ++k) {
        if (is_basic[k] || artificial[k] || sgn(T[leave][k]) >= 0) continue;
        Rational ratio = d[k] / -T[leave][k];
        if (enter < 0 || ratio < best) {
          enter = k;
          best = ratio;
        }
      }
      if (enter < 0) return leave;
      is_basic[basis[leave]] = 0;
      is_basic[enter] = 1;
      pivot(leave, enter);
    }
  }

  // Row multipliers of the normalized system read off the unit columns.
  std::vector<Rational> row_multipliers_from_objective(const std::vector<Rational>& c) const {
    std::vector<Rational> y(T.size());
    for (std::size_t i = 0; i < T.size(); ++i) {
      int u = unit_col[i];
      y[i] = (c[u] - d[u]) * unit_sign[i];
    }
    return y;
  }

  std::vector<Rational> to_original_rows(const std::vector<Rational>& y_internal) const {
    std::vector<Rational> y(lp.rows.size(), Rational(0));
    for (std::size_t i = 0; i < T.size(); ++i) {
      if (orig_row[i] < 0) continue;
      y[orig_row[i]] = negated[i] ? Rational(-y_internal[i]) : y_internal[i];
    }
    return y;
  }

  LPOutcome infeasible_from_objective(const std::vector<Rational>& c1) {
    LPOutcome out;
    out.status = LPStatus::kInfeasible;
    out.farkas = to_original_rows(row_multipliers_from_objective(c1));
    out.pivots = pivots;
    optimal = false;
    return out;
  }

  LPOutcome infeasible_from_row(int r) {
    LPOutcome out;
    out.status = LPStatus::kInfeasible;
    std::vector<Rational> y(T.size());
    for (std::size_t i = 0; i < T.size(); ++i) {
      y[i] = -T[r][unit_col[i]] * unit_sign[i];
    }
    out.farkas = to_original_rows(y);
    out.pivots = pivots;
    optimal = false;
    return out;
  }

  LPOutcome assemble_optimal() {
    LPOutcome out;
    out.status = LPStatus::kOptimal;
    std::vector<Rational> xi(ncols, Rational(0));
    for (std::size_t r = 0; r < T.size(); ++r) xi[basis[r]] = rhs[r];
    out.primal.resize(vars.size());
    for (std::size_t j = 0; j < vars.size(); ++j) {
      const VarMap& vm = vars[j];
      switch (vm.kind) {
        case VarKind::kShiftLower: out.primal[j] = vm.offset + xi[vm.col]; break;
        case VarKind::kFlipUpper: out.primal[j] = vm.offset - xi[vm.col]; break;
        case VarKind::kFree: out.primal[j] = xi[vm.col] - xi[vm.col_neg]; break;
      }
    }
    out.objective = 0;
    for (std::size_t j = 0; j < vars.size(); ++j) {
      out.objective += lp.variables[j].cost * out.primal[j];
    }
    std::vector<Rational> y = to_original_rows(row_multipliers_from_objective(cost));
    if (lp.sense == ObjectiveSense::kMaximize) {
      for (auto& v : y) v = -v;
    }
    out.dual = y;
    out.reduced_cost.resize(vars.size());
    for (std::size_t j = 0; j < vars.size(); ++j) out.reduced_cost[j] = lp.variables[j].cost;
    for (std::size_t i = 0; i < lp.rows.size(); ++i) {
      if (sgn(y[i]) == 0) continue;
      for (const auto& [j, a] : lp.rows[i].coeffs) out.reduced_cost[j] -= y[i] * a;
    }
    out.pivots = pivots;
    return out;
  }

  LPOutcome solve_from_scratch() {
    build();
    std::vector<Rational> c1(ncols, Rational(0));
    bool any_art = false;
    for (int k = 0; k < ncols; ++k) {
      if (artificial[k]) {
        c1[k] = 1;
        any_art = true;
      }
    }
    if (any_art) {
      price(c1);
      bool bounded = primal_simplex(true);
      ATSP_CHECK(bounded, "phase one cannot be unbounded");
      if (sgn(z) > 0) return infeasible_from_objective(c1);
      // Drive zero-level artificials out of the basis where possible.
      for (int r = 0; r < static_cast<int>(T.size()); ++r) {
        if (!artificial[basis[r]]) continue;
        for (int k = 0; k < ncols; ++k) {
          if (!artificial[k] && sgn(T[r][k]) != 0) {
            pivot(r, k);
            break;
          }
        }
      }
    }
    price(cost);
    if (!primal_simplex(false)) {
      LPOutcome out;
      out.status = LPStatus::kUnbounded;
      out.pivots = pivots;
      optimal = false;
      return out;
    }
    optimal = true;
    return assemble_optimal();
  }

  LPOutcome append_row(const LPRow& row) {
    std::vector<Rational> coef;
    Rational b = internal_row(row, coef);
    int slack = new_column(Rational(0), false);
    coef.emplace_back(0);
    // a x + s = b for <=; -(a x) + s = -b for >=.
    bool neg = row.sense == RowSense::kGreaterEqual;
    coef[slack] = 1;
    if (neg) {
      for (int k = 0; k < slack; ++k) coef[k] = -coef[k];
      b = -b;
    }
    for (std::size_t r = 0; r < T.size(); ++r) {
      const int k = basis[r];
      if (sgn(coef[k]) == 0) continue;
      Rational f = coef[k];
      for (int c = 0; c < ncols; ++c) {
        if (sgn(T[r][c]) != 0) coef[c] -= f * T[r][c];
      }
      b -= f * rhs[r];
    }
    T.push_back(std::move(coef));
    rhs.push_back(b);
    basis.push_back(slack);
    unit_col.push_back(slack);
    unit_sign.push_back(1);
    negated.push_back(neg ? 1 : 0);
    orig_row.push_back(static_cast<int>(lp.rows.size()) - 1);

    int bad = dual_simplex();
    if (bad >= 0) return infeasible_from_row(bad);
    optimal = true;
    return assemble_optimal();
  }
};

SimplexSolver::SimplexSolver(LinearProgram lp) : impl_(std::make_unique<Impl>()) {
  impl_->lp = std::move(lp);
}
SimplexSolver::~SimplexSolver() = default;
SimplexSolver::SimplexSolver(SimplexSolver&&) noexcept = default;
SimplexSolver& SimplexSolver::operator=(SimplexSolver&&) noexcept = default;

LPOutcome SimplexSolver::solve() { return impl_->solve_from_scratch(); }

LPOutcome SimplexSolver::add_row_and_resolve(LPRow row) {
  impl_->lp.rows.push_back(row);
  if (!impl_->optimal || row.sense == RowSense::kEqual) {
    return impl_->solve_from_scratch();
  }
  return impl_->append_row(row);
}

const LinearProgram& SimplexSolver::program() const { return impl_->lp; }
long SimplexSolver::total_pivots() const { return impl_->pivots; }

LPOutcome solve_lp(const LinearProgram& lp) {
  SimplexSolver s(lp);
  return s.solve();
}

bool primal_feasible(const LinearProgram& lp, const std::vector<Rational>& x) {
  if (x.size() != lp.variables.size()) return false;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const LPVariable& v = lp.variables[j];
    if (v.lower && x[j] < *v.lower) return false;
    if (v.upper && x[j] > *v.upper) return false;
  }
  for (const LPRow& row : lp.rows) {
    Rational lhs = 0;
    for (const auto& [j, a] : row.coeffs) lhs += a * x[j];
    switch (row.sense) {
      case RowSense::kLessEqual: if (lhs > row.rhs) return false; break;
      case RowSense::kEqual: if (lhs != row.rhs) return false; break;
      case RowSense::kGreaterEqual: if (lhs < row.rhs) return false; break;
    }
  }
  return true;
}

Rational dual_objective(const LinearProgram& lp, const LPOutcome& out) {
  Rational val = 0;
  for (std::size_t i = 0; i < lp.rows.size(); ++i) val += out.dual[i] * lp.rows[i].rhs;
  const bool minimize = lp.sense == ObjectiveSense::kMinimize;
  for (std::size_t j = 0; j < lp.variables.size(); ++j) {
    const Rational& r = out.reduced_cost[j];
    const LPVariable& v = lp.variables[j];
    if (sgn(r) == 0) continue;
    // Minimization charges the cheapest box point, maximization the dearest.
    bool use_lower = minimize ? sgn(r) > 0 : sgn(r) < 0;
    const auto& bound = use_lower ? v.lower : v.upper;
    ATSP_CHECK(bound.has_value(), "dual infeasible: reduced cost against an infinite bound");
    val += r * *bound;
  }
  return val;
}

bool certifies_infeasibility(const LinearProgram& lp, const std::vector<Rational>& y) {
  if (y.size() != lp.rows.size()) return false;
  std::vector<Rational> g(lp.variables.size(), Rational(0));
  Rational yb = 0;
  for (std::size_t i = 0; i < lp.rows.size(); ++i) {
    const LPRow& row = lp.rows[i];
    if (row.sense == RowSense::kGreaterEqual && sgn(y[i]) < 0) return false;
    if (row.sense == RowSense::kLessEqual && sgn(y[i]) > 0) return false;
    for (const auto& [j, a] : row.coeffs) g[j] += y[i] * a;
    yb += y[i] * row.rhs;
  }
  Rational box_max = 0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (sgn(g[j]) > 0) {
      if (!lp.variables[j].upper) return false;
      box_max += g[j] * *lp.variables[j].upper;
    } else if (sgn(g[j]) < 0) {
      if (!lp.variables[j].lower) return false;
      box_max += g[j] * *lp.variables[j].lower;
    }
  }
  return box_max < yb;
}

}  // namespace atsp
