#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fibenv/cheb.hpp"
#include "fibenv/functions.hpp"
#include "fibenv/localization.hpp"

namespace fibenv {

// A bounded compactly supported function plus a modeled discontinuity set.
// The function must vanish outside the support; mass on the bad set is what
// the sandwich stage has to absorb.
struct RiemannIntegrableDescriptor {
  SampledFunction function;
  std::set<PointId> bad_points;
  std::set<PointId> support;

  static RiemannIntegrableDescriptor make(SampledFunction f,
                                          std::set<PointId> bad_points = {});
};

struct BudgetLedger {
  double eps = 0.0;
  double eps1 = 0.0;
  SampledFunction cutoff_c;       // on the target space
  SampledFunction dominating_mc;  // module element with pullback(c) <= mc
  SampledFunction sandwich_c1;
  SampledFunction sandwich_c2;
  SampledFunction sw_m1;  // Chebyshev approximation of c1 in the module
  SampledFunction sw_m2;  // Chebyshev approximation of c2 in the module
  double mc_sup = 0.0;
  double mc_mass = 0.0;
};

struct EnvelopeCertificate {
  SampledFunction m1;
  SampledFunction m2;
  double eps = 0.0;
  std::optional<BudgetLedger> budget;
};

// Re-checks the two defining inequalities by plain arithmetic, independent of
// any solver state: |phi - m1| <= m2 + 1e-9 pointwise and mu(m2) < eps.
bool verify_certificate(const SampledFunction& phi, const EnvelopeCertificate& cert,
                        const WeightedMeasure& mu, std::string* why = nullptr);

// U_eps membership: delegates to the dominator LP over the real span of the
// module basis (plus conjugates, already folded into the real basis).
FeasibilityCertificate membership_U_eps(const SampledFunction& h,
                                        const PullbackModule& module,
                                        const WeightedMeasure& mu, double eps);

struct ClosureRung {
  double eps = 0.0;
  bool feasible = false;
  std::optional<EnvelopeCertificate> certificate;
};

struct ClosureReport {
  std::vector<ClosureRung> rungs;
  double min_feasible_mass = 0.0;  // LP optimum of mu(m2) under domination
  bool in_closure_at_min_rung = false;
};

// For each eps in the decreasing ladder, searches for module-span m1, m2 with
// |h - m1| <= m2 and mu(m2) < eps (single LP minimizing mu(m2), m1 free).
ClosureReport closure_membership(const SampledFunction& h, const PullbackModule& module,
                                 const WeightedMeasure& mu,
                                 const std::vector<double>& eps_ladder);

struct NestingViolation {
  std::size_t sample_index = 0;
  std::string detail;
};

struct NestingReport {
  std::size_t pairs_checked = 0;
  std::size_t witnesses_recombined = 0;
  std::vector<NestingViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Witness-level check of the nesting U'_{eps'} subset U_eps: every sampled h
// feasible at eps' (with a dominator from the closure construction) must
// recombine, via the n1 + n2 witness, into a dominator feasible at eps.
NestingReport verify_nesting(const PullbackModule& module, const WeightedMeasure& mu,
                             const std::vector<std::pair<double, double>>& eps_pairs,
                             const std::vector<SampledFunction>& samples);

// Witness pair for (pullback(c) * m) lying in the closure at resolution eps:
// m1 = pullback(a) * m with a an algebra approximant of c, m2 the scaled
// dominating element.
EnvelopeCertificate closure_module_mult(const SampledFunction& c,
                                        const SampledFunction& m,
                                        const PullbackModule& module,
                                        const WeightedMeasure& mu, double eps);

// LP-minimal module element n with n >= |m| pointwise.
SampledFunction find_dominating(const SampledFunction& m, const PullbackModule& module);

// Module element strictly positive at x, built as dominate(n_x) for some n_x
// not vanishing at x.
SampledFunction find_positive_at(const PointId& x, const PullbackModule& module);

// Bourbaki sandwich: c1 agrees with phi off the bad set and takes the
// midpoint of the modeled local range on it; c2 is the oscillation envelope.
std::pair<SampledFunction, SampledFunction> bourbaki_sandwich(
    const RiemannIntegrableDescriptor& phi, const WeightedMeasure& mu, double eps1);

// Full two-sided approximation pipeline with the eps1 budget.
EnvelopeCertificate main_theorem_pipeline(const RiemannIntegrableDescriptor& phi,
                                          const PullbackModule& module,
                                          const WeightedMeasure& mu, double eps);

// Splices a good-region certificate with a supplied bad-set majorant, then
// lands back in the module span.
EnvelopeCertificate density_theorem_splice(const RiemannIntegrableDescriptor& phi,
                                           const PullbackModule& module,
                                           const WeightedMeasure& mu,
                                           const SampledFunction& base_cutoff,
                                           const SampledFunction& bad_set_majorant,
                                           double eps);

// Constructive double closure: two half-resolution certificates, one for each
// side of a certificate-of-a-certificate, recombined into a single
// certificate at resolution eps.
EnvelopeCertificate splice_double_closure(const SampledFunction& phi,
                                          const PullbackModule& module,
                                          const WeightedMeasure& mu, double eps);

}  // namespace fibenv
