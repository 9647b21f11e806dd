#include "fibenv/simplex.hpp"

#include <cmath>
#include <limits>

#include "fibenv/errors.hpp"

namespace fibenv {

namespace {
constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;

// Internal signal: the tableau stopped making progress (degenerate cycling).
struct SimplexStall {};
}  // namespace

void LpProblem::set_objective(std::vector<double> c) {
  if (c.size() != num_vars_) throw ArgumentError("objective length mismatch");
  objective_ = std::move(c);
}

void LpProblem::add_constraint(std::vector<double> coeffs, Relation rel, double rhs) {
  if (coeffs.size() != num_vars_) throw ArgumentError("constraint length mismatch");
  constraints_.push_back({std::move(coeffs), rel, rhs});
}

namespace {

// One two-phase solve. `perturb` shifts every right-hand side by a tiny
// deterministic row-dependent amount, which breaks the degenerate ties that
// make the unperturbed tableau cycle; callers retry with perturbation when a
// stall is detected.
LpResult solve_once(const std::vector<LpConstraint>& constraints,
                    const std::vector<double>& objective, std::size_t n_free,
                    double perturb) {
  const std::size_t m = constraints.size();
  // Column layout: [x+ (n_free)] [x- (n_free)] [slack/surplus (m, some unused)]
  // [artificials (m, some unused)].
  const std::size_t slack0 = 2 * n_free;
  const std::size_t art0 = slack0 + m;
  const std::size_t n_total = art0 + m;

  std::vector<std::vector<double>> a(m, std::vector<double>(n_total + 1, 0.0));
  std::vector<std::size_t> basis(m);
  std::vector<bool> has_artificial(m, false);

  for (std::size_t i = 0; i < m; ++i) {
    const LpConstraint& row = constraints[i];
    double sign = 1.0;
    double rhs = row.rhs;
    if (perturb > 0.0 && row.relation != Relation::Equal) {
      // Deterministic pseudo-random offset in [0.5, 1.5) * perturb * scale,
      // directed so the feasible region only grows.
      const double u =
          (double)((1099087573u * (unsigned)(i + 1)) & 1023u) / 1024.0;
      rhs += (0.5 + u) * perturb * (1.0 + std::abs(rhs)) *
             (row.relation == Relation::LessEq ? 1.0 : -1.0);
    }
    Relation rel = row.relation;
    if (rhs < 0.0) {
      sign = -1.0;
      rhs = -rhs;
      if (rel == Relation::LessEq) rel = Relation::GreaterEq;
      else if (rel == Relation::GreaterEq) rel = Relation::LessEq;
    }
    for (std::size_t j = 0; j < n_free; ++j) {
      double v = sign * row.coeffs[j];
      a[i][j] = v;
      a[i][n_free + j] = -v;
    }
    a[i][n_total] = rhs;
    switch (rel) {
      case Relation::LessEq:
        a[i][slack0 + i] = 1.0;
        basis[i] = slack0 + i;
        break;
      case Relation::GreaterEq:
        a[i][slack0 + i] = -1.0;
        a[i][art0 + i] = 1.0;
        basis[i] = art0 + i;
        has_artificial[i] = true;
        break;
      case Relation::Equal:
        a[i][art0 + i] = 1.0;
        basis[i] = art0 + i;
        has_artificial[i] = true;
        break;
    }
  }

  auto pivot = [&](std::size_t r, std::size_t c) {
    double piv = a[r][c];
    for (double& v : a[r]) v /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r) continue;
      double factor = a[i][c];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j <= n_total; ++j) a[i][j] -= factor * a[r][j];
      a[i][c] = 0.0;
    }
    basis[r] = c;
  };

  // Dantzig entering rule; among near-tied minimum ratios the leaving row
  // with the largest pivot wins (stability). Progress is monitored and a
  // stall raises SimplexStall for the caller to retry perturbed.
  auto run_simplex = [&](const std::vector<double>& cost,
                         bool allow_artificial_entering) -> bool {
    double last_obj = std::numeric_limits<double>::infinity();
    std::size_t stall = 0;
    const std::size_t stall_limit = 10 * (m + n_free) + 200;
    for (;;) {
      double obj = 0.0;
      for (std::size_t i = 0; i < m; ++i) obj += cost[basis[i]] * a[i][n_total];
      if (obj < last_obj - 1e-12 * (1.0 + std::abs(last_obj))) {
        last_obj = obj;
        stall = 0;
      } else if (++stall > stall_limit) {
        throw SimplexStall{};
      }
      // Reduced costs: z_j = cost_j - sum_i cost_basis[i] * a[i][j].
      std::vector<double> dual(m);
      for (std::size_t i = 0; i < m; ++i) dual[i] = cost[basis[i]];
      std::size_t entering = n_total;
      double most_negative = -kCostTol;
      const std::size_t limit = allow_artificial_entering ? n_total : art0;
      for (std::size_t j = 0; j < limit; ++j) {
        double red = cost[j];
        for (std::size_t i = 0; i < m; ++i) red -= dual[i] * a[i][j];
        if (red < most_negative) {
          most_negative = red;
          entering = j;
        }
      }
      if (entering == n_total) return true;  // optimal
      std::size_t leaving = m;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        if (a[i][entering] > kPivotTol) {
          double ratio = a[i][n_total] / a[i][entering];
          if (ratio < best_ratio - 1e-9 * (1.0 + std::abs(best_ratio))) {
            best_ratio = ratio;
            leaving = i;
          } else if (ratio <= best_ratio + 1e-9 * (1.0 + std::abs(best_ratio)) &&
                     (leaving == m ||
                      a[i][entering] > a[leaving][entering])) {
            leaving = i;
            best_ratio = std::min(best_ratio, ratio);
          }
        }
      }
      if (leaving == m) return false;  // unbounded
      pivot(leaving, entering);
    }
  };

  LpResult result;

  bool any_artificial = false;
  for (bool b : has_artificial) any_artificial = any_artificial || b;
  if (any_artificial) {
    std::vector<double> phase1(n_total, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      if (has_artificial[i]) phase1[art0 + i] = 1.0;
    }
    run_simplex(phase1, true);
    double phase1_obj = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] >= art0) phase1_obj += a[i][n_total];
    }
    if (phase1_obj > 1e-7) {
      result.status = LpStatus::Infeasible;
      result.infeasibility = phase1_obj;
      // Worst remaining artificial identifies a violated input row.
      double worst = -1.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] >= art0 && a[i][n_total] > worst) {
          worst = a[i][n_total];
          result.violated_row = basis[i] - art0;
        }
      }
      return result;
    }
    // Drive any degenerate artificials out of the basis.
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] < art0) continue;
      std::size_t c = n_total;
      for (std::size_t j = 0; j < art0; ++j) {
        if (std::abs(a[i][j]) > kPivotTol) { c = j; break; }
      }
      if (c < n_total) pivot(i, c);
      // A row with no eligible pivot is redundant; its artificial stays
      // basic at value zero and never re-enters.
    }
  }

  std::vector<double> phase2(n_total, 0.0);
  for (std::size_t j = 0; j < n_free; ++j) {
    double cj = objective.empty() ? 0.0 : objective[j];
    phase2[j] = cj;
    phase2[n_free + j] = -cj;
  }
  if (!run_simplex(phase2, false)) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  result.status = LpStatus::Optimal;
  result.x.assign(n_free, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t b = basis[i];
    double v = a[i][n_total];
    if (b < n_free) result.x[b] += v;
    else if (b < 2 * n_free) result.x[b - n_free] -= v;
  }
  result.objective = 0.0;
  for (std::size_t j = 0; j < n_free; ++j) {
    result.objective += (objective.empty() ? 0.0 : objective[j]) * result.x[j];
  }
  return result;
}

}  // namespace

LpResult LpProblem::solve() const {
  for (double perturb : {0.0, 1e-10, 1e-8}) {
    try {
      return solve_once(constraints_, objective_, num_vars_, perturb);
    } catch (const SimplexStall&) {
      continue;
    }
  }
  throw ResolutionError("simplex: degenerate cycling persists under perturbation");
}

}  // namespace fibenv
