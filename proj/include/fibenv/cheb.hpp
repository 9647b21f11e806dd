#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fibenv/functions.hpp"
#include "fibenv/simplex.hpp"

namespace fibenv {

struct ChebSolution {
  std::vector<Complex> coefficients;
  double distance = 0.0;
  std::vector<PointId> active_points;  // points where |error| attains distance
};

// Best sup-norm approximation of f over the given point subset by the span of
// the basis. Real-valued instances are solved exactly as a linear program;
// complex instances use Lawson's iteratively reweighted least-squares scheme,
// where the weighted residual norm certifies a lower bound and the maximum
// residual an upper bound, iterated until the two agree to 1e-10 relative.
ChebSolution cheb_best_approx(const SampledFunction& f,
                              const std::vector<SampledFunction>& basis,
                              const std::vector<PointId>& points);

// Convenience overload over all points of f's space.
ChebSolution cheb_best_approx(const SampledFunction& f,
                              const std::vector<SampledFunction>& basis);

struct FeasibilityCertificate {
  bool feasible = false;
  std::optional<std::vector<double>> witness_coefficients;
  std::optional<SampledFunction> witness;      // the dominating element m
  std::optional<double> achieved_mass;         // mu(m) at the witness
  double min_mass = 0.0;  // LP-optimal mass of a dominator (infeasibility bound)
  std::string detail;
};

// Is there m in the real span of the basis with m >= |h| pointwise and
// mu(m) <= eps - 1e-9? The LP minimizes mu(m) over all dominators, so the
// optimum doubles as a lower bound certifying infeasibility.
FeasibilityCertificate envelope_feasible(const SampledFunction& h,
                                         const std::vector<SampledFunction>& real_basis,
                                         const WeightedMeasure& mu, double eps);

// Exhaustive grid oracle for low-dimensional real Chebyshev problems.
// Refuses basis dimension > 3 or grid_steps > 201.
ChebSolution brute_force_cheb_oracle(const SampledFunction& f,
                                     const std::vector<SampledFunction>& basis,
                                     const std::vector<PointId>& points,
                                     double grid_radius, int grid_steps);

}  // namespace fibenv
