#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fibenv/envelope.hpp"
#include "fibenv/functions.hpp"

namespace fibenv {

// A sequence of nonnegative measures on a fixed space, given either as an
// explicit list or as a rule n -> mu_n.
class MeasureSequence {
 public:
  MeasureSequence(WeightedMeasure base, std::vector<WeightedMeasure> terms);
  MeasureSequence(WeightedMeasure base,
                  std::function<WeightedMeasure(int)> rule, int n_max);

  // mu + (1/n) nu.
  static MeasureSequence perturbation(const WeightedMeasure& base,
                                      const WeightedMeasure& nu, int n_max);

  const WeightedMeasure& base() const { return base_; }
  WeightedMeasure term(int n) const;  // n = 1..n_max
  int n_max() const { return n_max_; }

 private:
  WeightedMeasure base_;
  std::vector<WeightedMeasure> terms_;
  std::function<WeightedMeasure(int)> rule_;
  int n_max_ = 0;
};

struct ConvergenceDirection {
  std::size_t basis_index = 0;
  double tail_deviation = 0.0;  // max |mu_n(b) - mu(b)| over the tail window
  bool convergent = false;
};

struct ModuleConvergenceReport {
  std::vector<ConvergenceDirection> directions;
  std::vector<std::vector<double>> deviations;  // [basis][n-1]
  bool all_convergent = false;
};

ModuleConvergenceReport check_convergence_on_module(const MeasureSequence& seq,
                                                    const PullbackModule& module,
                                                    double tolerance, int N);

struct TransferReport {
  bool hypothesis_ok = false;      // module convergence gate
  bool conclusion_asserted = false;
  std::vector<double> lhs;         // |mu_n(phi) - mu(phi)| per n
  std::vector<double> rhs;         // triangle bound per n
  double tail_limsup = 0.0;        // max lhs over the tail window [N/2, N]
  double bound = 0.0;              // 2*eps + tolerance
  std::string detail;
};

// Verifies the convergence-transfer chain numerically, given a certificate
// (m1, m2) for phi at resolution eps.
TransferReport transfer_convergence(const MeasureSequence& seq,
                                    const RiemannIntegrableDescriptor& phi,
                                    const PullbackModule& module,
                                    const EnvelopeCertificate& cert, double eps,
                                    int N, double tolerance = 1e-6);

// Synthetic carrier of the four-case estimate bookkeeping: everything is a
// point subset or a sampled function; the checker only verifies inequalities.
struct BadSetEstimateFixture {
  FiberedSystem system;
  std::set<PointId> good;                     // partition of source points
  std::set<PointId> bad;
  std::vector<SampledFunction> hat_h_theta;   // on the source
  std::vector<SampledFunction> a_i;           // on the target
  std::vector<std::set<PointId>> V;           // target regions, one per theta
  std::vector<std::set<PointId>> W_bar;       // closed covering boxes
  std::vector<std::set<PointId>> W_prime;     // open enlargements
  std::set<PointId> C1;                       // target compact neighborhood
  std::set<PointId> B;                        // target band
  SampledFunction hat_h2;                     // on the source
  double c_G = 1.0, c_prime_G = 1.0;
  double eps1 = 0.0, eps2 = 0.0, eps3 = 0.0;
  double M_const = 0.0, N_const = 0.0;
  double eps_total = 0.0;  // the final mu(h') < eps/2 target
};

struct BadSetCheck {
  std::string name;
  bool pass = false;
  PointId worst_point;
  double margin = 0.0;  // bound minus value at the worst point
};

struct BadSetReport {
  std::vector<BadSetCheck> checks;
  bool all_pass = false;
  double h_prime_mass = 0.0;
};

// Validates the fixture's band constraints, then checks the four pointwise
// majorizations, the two h' sign conditions, and the final mass bound. Pure
// checker: inputs are never adjusted.
BadSetReport verify_bad_set_estimates(const BadSetEstimateFixture& fx);

}  // namespace fibenv
