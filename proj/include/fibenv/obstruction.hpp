#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fibenv/envelope.hpp"
#include "fibenv/functions.hpp"

namespace fibenv {

// Minimal carrier of the fiber-separation phenomenon: one target point y0
// whose fiber holds two atoms of masses d1 and d2, plus optional singleton
// fibers of unit mass. The pullback-only module sees fibers as single points;
// the separating module also contains the indicator of pi1.
struct ObstructionFixture {
  FiberedSystem system;
  PointId y0;
  PointId pi1;
  PointId pi2;
  double d1 = 0.0;
  double d2 = 0.0;
  PullbackModule pullback_module;
  PullbackModule separating_module;
};

enum class ModuleChoice { PullbackOnly, Separating };

ObstructionFixture build_fixture(double d1, double d2, int extra_points);

struct ThresholdResult {
  double threshold = 0.0;   // bisection estimate of the infeasibility cutoff
  double lp_exact = 0.0;    // LP-minimal certificate mass
  double analytic_bound = 0.0; // d1 / 2, the sufficient lower bound
  int bisection_steps = 0;
};

// Bisects closure-membership feasibility for phi = indicator{pi1} over eps,
// to a resolution of 1e-4.
ThresholdResult infeasibility_threshold(const ObstructionFixture& fx,
                                        ModuleChoice choice);

struct TraceStep {
  std::string statement;
  double lhs = 0.0;
  std::string relation;  // "<=", ">=", "<", "=="
  double rhs = 0.0;
  bool holds = false;
};

struct ContradictionTrace {
  bool contradiction = false;
  double eps = 0.0;
  double analytic_bound = 0.0;
  double lp_exact = 0.0;
  std::vector<TraceStep> steps;
  std::string summary;
  // Attached when eps is above the threshold: a feasible certificate.
  std::optional<EnvelopeCertificate> witness;
};

// Instantiates the two displayed fiber inequalities, the g-independent lower
// bound at y0, and the resulting mass contradiction as a chain of plain
// arithmetic assertions.
ContradictionTrace contradiction_replay(const ObstructionFixture& fx, double eps);

// Re-evaluates every step of a trace by direct comparison; no LP involved.
bool verify_trace(const ContradictionTrace& trace, std::string* why = nullptr);

std::string trace_to_text(const ContradictionTrace& trace);

}  // namespace fibenv
