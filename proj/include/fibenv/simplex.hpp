#pragma once

#include <cstddef>
#include <vector>

namespace fibenv {

// Small dense linear programs:
//   minimize c.x  subject to row constraints  a.x {<=,>=,=} b,
// over free variables. Two-phase primal simplex on a dense tableau with a
// Dantzig entering rule and stability-biased ratio ties; stalls trigger a
// deterministic rhs-perturbation retry. Intended for instances of at most a
// few hundred rows and columns.
enum class Relation { LessEq, GreaterEq, Equal };

struct LpConstraint {
  std::vector<double> coeffs;
  Relation relation = Relation::LessEq;
  double rhs = 0.0;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  // Phase-1 residual when infeasible; the index of the worst-violated input
  // row at the phase-1 optimum, usable as a separating constraint.
  double infeasibility = 0.0;
  std::size_t violated_row = 0;
};

class LpProblem {
 public:
  explicit LpProblem(std::size_t num_vars) : num_vars_(num_vars) {}

  std::size_t num_vars() const { return num_vars_; }
  void set_objective(std::vector<double> c);
  void add_constraint(std::vector<double> coeffs, Relation rel, double rhs);

  LpResult solve() const;

 private:
  std::size_t num_vars_;
  std::vector<double> objective_;
  std::vector<LpConstraint> constraints_;
};

}  // namespace fibenv
