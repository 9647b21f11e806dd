#pragma once

#include <map>
#include <string>
#include <vector>

#include "fibenv/cheb.hpp"
#include "fibenv/functions.hpp"

namespace fibenv {

enum class ExecutionMode { Serial, Parallel };

struct PreflightReport {
  bool algebra_dense = false;       // coordinate indicators within 1e-8 of span
  bool module_stable = false;       // multiplication by p*(generators) stays in span
  bool conjugation_closed = false;
  double worst_density_residual = 0.0;
  double worst_stability_residual = 0.0;
  bool ok() const { return algebra_dense && module_stable && conjugation_closed; }
};

// Hypothesis checks for the localization equality: density of the algebra in
// C0(Y), module stability under p*A multiplication, conjugation closure.
PreflightReport preflight(const PullbackModule& module);

struct LocalizationReport {
  double global_distance = 0.0;
  std::map<PointId, double> fiber_distances;
  double sup_fiber_distance = 0.0;
  double gap = 0.0;  // global - sup_fiber
  bool hypotheses_ok = false;
  bool flagged = false;  // hypotheses violated; equality not asserted
};

// Global Chebyshev distance vs the sup of fiberwise distances. Fiber solves
// run in parallel in Parallel mode; the serial path is the reference.
LocalizationReport localize_distance(const SampledFunction& f,
                                     const PullbackModule& module,
                                     ExecutionMode mode = ExecutionMode::Parallel);

struct PartitionApproximant {
  std::vector<PointId> regions;                  // one singleton region per fiber
  std::vector<SampledFunction> sigma;            // algebra approximants of the indicators
  std::vector<SampledFunction> locals;           // per-fiber module elements g_i
  SampledFunction assembled;                     // sum of pullback(sigma_i) * g_i
  double achieved_error = 0.0;                   // sup |f - assembled|
  double target_error = 0.0;                     // sup_fiber_distance + eps
  double span_residual = 0.0;                    // distance of assembled to the module span
};

// Builds the partition-of-unity approximant: per fiber a module element
// within D + eps/2 on that fiber, exact fiber indicators as the partition,
// and algebra Chebyshev approximants of the indicators tight enough for the
// total budget. Guarantees sup|f - assembled| <= D + eps.
PartitionApproximant construct_approximant(const SampledFunction& f,
                                           const PullbackModule& module,
                                           double eps);

// CSV rows (fiber_id, fiber_size, fiber_distance) for a report.
std::string localization_csv(const LocalizationReport& report,
                             const PullbackModule& module);

}  // namespace fibenv
