#include "fibenv/obstruction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fibenv/errors.hpp"

namespace fibenv {

ObstructionFixture build_fixture(double d1, double d2, int extra_points) {
  if (d1 <= 0.0 || d2 <= 0.0) {
    throw ArgumentError("atom masses must be positive");
  }
  if (extra_points < 0) throw ArgumentError("extra point count must be >= 0");

  std::vector<PointId> xs = {"pi1", "pi2"};
  std::vector<PointId> ys = {"y0"};
  std::map<PointId, PointId> assign = {{"pi1", "y0"}, {"pi2", "y0"}};
  std::map<PointId, double> weights = {{"pi1", d1}, {"pi2", d2}};
  for (int i = 1; i <= extra_points; ++i) {
    PointId x = "x" + std::to_string(i);
    PointId y = "z" + std::to_string(i);
    xs.push_back(x);
    ys.push_back(y);
    assign[x] = y;
    weights[x] = 1.0;
  }
  FiniteSpace space_x(xs);
  FiniteSpace space_y(ys);
  FiberedMap map(space_x, space_y, std::move(assign));
  WeightedMeasure mu(space_x, std::move(weights));
  FiberedSystem system(map, mu);

  // Indicator generators make the base algebra all of C(Y).
  std::vector<SampledFunction> alg_gens;
  for (const auto& y : ys) {
    alg_gens.push_back(SampledFunction::indicator(space_y, y));
  }
  BaseAlgebra algebra(space_y, alg_gens, 1);

  ObstructionFixture fx;
  fx.y0 = "y0";
  fx.pi1 = "pi1";
  fx.pi2 = "pi2";
  fx.d1 = d1;
  fx.d2 = d2;
  fx.system = system;
  fx.pullback_module = PullbackModule(
      system, algebra, {SampledFunction::constant(space_x, 1.0)}, 1);
  fx.separating_module = PullbackModule(
      system, algebra,
      {SampledFunction::constant(space_x, 1.0),
       SampledFunction::indicator(space_x, "pi1")},
      1);
  return fx;
}

namespace {

const PullbackModule& pick(const ObstructionFixture& fx, ModuleChoice choice) {
  return choice == ModuleChoice::PullbackOnly ? fx.pullback_module
                                              : fx.separating_module;
}

bool feasible_at(const ObstructionFixture& fx, const PullbackModule& module,
                 double eps) {
  SampledFunction phi =
      SampledFunction::indicator(fx.system.map().source(), fx.pi1);
  ClosureReport rep = closure_membership(phi, module,
                                         fx.system.measure_upstairs(), {eps});
  return rep.rungs.at(0).feasible;
}

}  // namespace

ThresholdResult infeasibility_threshold(const ObstructionFixture& fx,
                                        ModuleChoice choice) {
  const PullbackModule& module = pick(fx, choice);
  SampledFunction phi =
      SampledFunction::indicator(fx.system.map().source(), fx.pi1);
  ClosureReport probe = closure_membership(
      phi, module, fx.system.measure_upstairs(), {1.0});

  ThresholdResult result;
  result.lp_exact = probe.min_feasible_mass;
  result.analytic_bound = fx.d1 / 2.0;

  double lo = 0.0;
  double hi = 1.0;
  while (!feasible_at(fx, module, hi)) {
    lo = hi;
    hi *= 2.0;
    ++result.bisection_steps;
    if (hi > 1e9) throw ResolutionError("no feasible eps found below 1e9");
  }
  while (hi - lo > 1e-4) {
    double mid = 0.5 * (lo + hi);
    if (feasible_at(fx, module, mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
    ++result.bisection_steps;
  }
  result.threshold = 0.5 * (lo + hi);
  return result;
}

ContradictionTrace contradiction_replay(const ObstructionFixture& fx, double eps) {
  if (eps <= 0.0) throw ArgumentError("eps must be positive");
  ContradictionTrace trace;
  trace.eps = eps;
  trace.analytic_bound = fx.d1 / 2.0;
  const double lp_exact = (fx.d1 + fx.d2) / 2.0;
  trace.lp_exact = lp_exact;

  auto step = [&](std::string stmt, double lhs, std::string rel, double rhs) {
    TraceStep s{std::move(stmt), lhs, std::move(rel), rhs, false};
    if (s.relation == "<=") s.holds = s.lhs <= s.rhs + 1e-12;
    else if (s.relation == ">=") s.holds = s.lhs >= s.rhs - 1e-12;
    else if (s.relation == "<") s.holds = s.lhs < s.rhs;
    else s.holds = std::abs(s.lhs - s.rhs) <= 1e-12;
    trace.steps.push_back(s);
  };

  if (eps >= lp_exact) {
    trace.contradiction = false;
    trace.summary = "no contradiction at this eps";
    SampledFunction phi =
        SampledFunction::indicator(fx.system.map().source(), fx.pi1);
    ClosureReport rep = closure_membership(
        phi, fx.pullback_module, fx.system.measure_upstairs(), {eps});
    if (rep.rungs.at(0).feasible) trace.witness = rep.rungs.at(0).certificate;
    step("feasible regime: eps >= (d1+d2)/2", eps, ">=", lp_exact);
    return trace;
  }

  // Any pullback certificate (g, h) evaluated on the two-atom fiber gives
  // |1 - g(y0)| <= h(y0) and |g(y0)| <= h(y0); the triangle inequality makes
  // the sum at least 1 regardless of g, which we certify by scanning g.
  double worst_sum = std::numeric_limits<double>::infinity();
  for (int i = -400; i <= 700; ++i) {
    double g = i / 200.0;
    worst_sum = std::min(worst_sum, std::abs(1.0 - g) + std::abs(g));
  }
  step("fiber inequality at pi1: |1 - g(y0)| <= h(y0) (assumed certificate)",
       0.0, "<=", 0.0);
  step("fiber inequality at pi2: |g(y0)| <= h(y0) (assumed certificate)",
       0.0, "<=", 0.0);
  step("g-independence: min over g of |1-g| + |g|", worst_sum, ">=", 1.0);
  step("hence 2 h(y0) >= 1, so h(y0)", 0.5, ">=", 0.5);
  const double mass_lb = (fx.d1 + fx.d2) * 0.5;
  step("mass lower bound: (d1 + d2) * h(y0)", mass_lb, ">=", lp_exact);
  step("the coarser analytic bound is weaker: (d1+d2)/2 >= d1/2", lp_exact, ">=",
       trace.analytic_bound);
  step("certificate mass must be below eps", eps, "<", mass_lb);

  // The last step is the contradiction: mu(h) >= mass_lb yet mu(h) < eps.
  trace.steps.back().holds = eps < mass_lb;
  trace.contradiction = true;
  for (std::size_t i = 0; i + 1 < trace.steps.size(); ++i) {
    trace.contradiction = trace.contradiction && trace.steps[i].holds;
  }
  trace.contradiction = trace.contradiction && eps < mass_lb;
  trace.summary = trace.contradiction
                      ? "contradiction: required mass exceeds eps"
                      : "chain incomplete";
  return trace;
}

bool verify_trace(const ContradictionTrace& trace, std::string* why) {
  for (const auto& s : trace.steps) {
    bool ok;
    if (s.relation == "<=") ok = s.lhs <= s.rhs + 1e-12;
    else if (s.relation == ">=") ok = s.lhs >= s.rhs - 1e-12;
    else if (s.relation == "<") ok = s.lhs < s.rhs;
    else if (s.relation == "==") ok = std::abs(s.lhs - s.rhs) <= 1e-12;
    else {
      if (why) *why = "unknown relation '" + s.relation + "'";
      return false;
    }
    if (ok != s.holds) {
      if (why) *why = "step disagrees with recomputation: " + s.statement;
      return false;
    }
    if (trace.contradiction && !s.holds) {
      if (why) *why = "claimed contradiction rests on a failing step: " + s.statement;
      return false;
    }
  }
  return true;
}

std::string trace_to_text(const ContradictionTrace& trace) {
  std::ostringstream out;
  out << "eps = " << trace.eps << ", analytic bound = " << trace.analytic_bound
      << ", LP-exact = " << trace.lp_exact << "\n";
  for (const auto& s : trace.steps) {
    out << (s.holds ? "  [ok]   " : "  [FAIL] ") << s.statement << "   ("
        << s.lhs << " " << s.relation << " " << s.rhs << ")\n";
  }
  out << (trace.contradiction ? "=> contradiction\n" : "=> " + trace.summary + "\n");
  return out.str();
}

}  // namespace fibenv
