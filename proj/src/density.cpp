#include "fibenv/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fibenv/errors.hpp"

namespace fibenv {

MeasureSequence::MeasureSequence(WeightedMeasure base, std::vector<WeightedMeasure> terms)
    : base_(std::move(base)), terms_(std::move(terms)) {
  n_max_ = static_cast<int>(terms_.size());
  for (const auto& t : terms_) {
    if (!t.space().same_as(base_.space())) {
      throw ConfigError("measure sequence term on a different space");
    }
  }
}

MeasureSequence::MeasureSequence(WeightedMeasure base,
                                 std::function<WeightedMeasure(int)> rule, int n_max)
    : base_(std::move(base)), rule_(std::move(rule)), n_max_(n_max) {
  if (n_max_ < 1) throw ArgumentError("measure sequence needs n_max >= 1");
}

MeasureSequence MeasureSequence::perturbation(const WeightedMeasure& base,
                                              const WeightedMeasure& nu, int n_max) {
  if (!nu.space().same_as(base.space())) {
    throw ConfigError("perturbation measure on a different space");
  }
  WeightedMeasure base_copy = base;
  WeightedMeasure nu_copy = nu;
  return MeasureSequence(
      base,
      [base_copy, nu_copy](int n) {
        std::map<PointId, double> w;
        for (const auto& x : base_copy.space().points()) {
          double v = base_copy.weight(x) + nu_copy.weight(x) / n;
          if (v != 0.0) w[x] = v;
        }
        return WeightedMeasure(base_copy.space(), std::move(w));
      },
      n_max);
}

WeightedMeasure MeasureSequence::term(int n) const {
  if (n < 1 || n > n_max_) throw ArgumentError("measure sequence index out of range");
  if (rule_) return rule_(n);
  return terms_[n - 1];
}

ModuleConvergenceReport check_convergence_on_module(const MeasureSequence& seq,
                                                    const PullbackModule& module,
                                                    double tolerance, int N) {
  if (N > seq.n_max()) throw ArgumentError("N exceeds the sequence length");
  ModuleConvergenceReport report;
  const auto& basis = module.basis();
  report.deviations.assign(basis.size(), std::vector<double>(N, 0.0));

  std::vector<Complex> base_vals(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    base_vals[k] = integrate(basis[k], seq.base());
  }
  for (int n = 1; n <= N; ++n) {
    WeightedMeasure mu_n = seq.term(n);
    for (std::size_t k = 0; k < basis.size(); ++k) {
      report.deviations[k][n - 1] = std::abs(integrate(basis[k], mu_n) - base_vals[k]);
    }
  }
  report.all_convergent = true;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    ConvergenceDirection dir;
    dir.basis_index = k;
    for (int n = std::max(1, N / 2); n <= N; ++n) {
      dir.tail_deviation = std::max(dir.tail_deviation, report.deviations[k][n - 1]);
    }
    dir.convergent = dir.tail_deviation <= tolerance;
    report.all_convergent = report.all_convergent && dir.convergent;
    report.directions.push_back(dir);
  }
  return report;
}

TransferReport transfer_convergence(const MeasureSequence& seq,
                                    const RiemannIntegrableDescriptor& phi,
                                    const PullbackModule& module,
                                    const EnvelopeCertificate& cert, double eps,
                                    int N, double tolerance) {
  TransferReport report;
  report.bound = 2.0 * eps + tolerance;

  // Certificate sanity: it must actually certify phi at eps.
  std::string why;
  if (!verify_certificate(phi.function, cert, seq.base(), &why)) {
    throw ArgumentError("transfer_convergence: certificate invalid (" + why +
                        "); run the pipeline first");
  }

  ModuleConvergenceReport gate =
      check_convergence_on_module(seq, module, tolerance, N);
  report.hypothesis_ok = gate.all_convergent;
  if (!report.hypothesis_ok) {
    report.conclusion_asserted = false;
    report.detail = "module convergence hypothesis fails; no transfer claimed";
    return report;
  }

  const Complex base_phi = integrate(phi.function, seq.base());
  const Complex base_m1 = integrate(cert.m1, seq.base());
  const double base_m2 = integrate(cert.m2, seq.base()).real();
  for (int n = 1; n <= N; ++n) {
    WeightedMeasure mu_n = seq.term(n);
    double lhs = std::abs(integrate(phi.function, mu_n) - base_phi);
    double m2_n = integrate(cert.m2, mu_n).real();
    double m1_dev = std::abs(integrate(cert.m1, mu_n) - base_m1);
    double rhs = m2_n + base_m2 + m1_dev;
    report.lhs.push_back(lhs);
    report.rhs.push_back(rhs);
    // The triangle decomposition is an identity-level inequality.
    if (lhs > rhs + 1e-12 * (1.0 + rhs)) {
      report.detail = "triangle bound violated at n = " + std::to_string(n);
      report.conclusion_asserted = false;
      return report;
    }
  }
  for (int n = std::max(1, N / 2); n <= N; ++n) {
    report.tail_limsup = std::max(report.tail_limsup, report.lhs[n - 1]);
  }
  report.conclusion_asserted = report.tail_limsup <= report.bound;
  if (!report.conclusion_asserted) {
    report.detail = "tail window bound exceeded";
  }
  return report;
}

namespace {

bool in(const std::set<PointId>& s, const PointId& x) { return s.count(x) != 0; }

template <typename SetList>
bool in_union(const SetList& sets, const PointId& x) {
  for (const auto& s : sets) {
    if (s.count(x)) return true;
  }
  return false;
}

}  // namespace

BadSetReport verify_bad_set_estimates(const BadSetEstimateFixture& fx) {
  BadSetReport report;
  const auto& map = fx.system.map();
  const auto& space_x = map.source();
  const std::size_t n_regions = fx.hat_h_theta.size();
  if (fx.a_i.size() != n_regions || fx.V.size() != n_regions ||
      fx.W_bar.size() != n_regions || fx.W_prime.size() != n_regions) {
    throw ConfigError("bad-set fixture: per-region lists have mismatched lengths");
  }

  // References returned by add_check stay valid across later additions only
  // because the storage is reserved up front.
  report.checks.reserve(8);
  auto add_check = [&](std::string name) -> BadSetCheck& {
    report.checks.push_back(BadSetCheck{std::move(name), true, "", 0.0});
    return report.checks.back();
  };
  auto record = [&](BadSetCheck& chk, const PointId& x, double value, double bound) {
    double margin = bound - value;
    if (chk.pass || margin < chk.margin) {
      if (margin < chk.margin || chk.worst_point.empty()) {
        chk.margin = margin;
        chk.worst_point = x;
      }
    }
    if (value > bound + 1e-12) chk.pass = false;
  };

  // Fixture band constraints (validated, not adjusted).
  {
    BadSetCheck& band = add_check("band-constraints");
    band.margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_regions; ++i) {
      for (const auto& x : space_x.points()) {
        if (!in(fx.V[i], map.apply(x))) continue;
        double v = fx.hat_h_theta[i].at(x).real();
        if (in(fx.good, x)) {
          record(band, x, v, fx.eps1);
          record(band, x, -v, 0.0);
        } else if (in(fx.bad, x)) {
          record(band, x, v, fx.c_G);
          record(band, x, 1.0 - v, 0.0);
        }
      }
      for (const auto& y : map.target().points()) {
        double a = fx.a_i[i].at(y).real();
        if (in(fx.B, y)) record(band, y, a, 1.0 + fx.eps3);
        if (in(fx.W_bar[i], y)) record(band, y, 1.0 - a, 0.0);
        if (in(fx.B, y) && !in(fx.W_prime[i], y)) record(band, y, a, fx.eps3);
      }
    }
  }

  // h1 = sum_i pullback(a_i) * hat_h_theta_i.
  SampledFunction h1 = SampledFunction::zero(space_x);
  for (std::size_t i = 0; i < n_regions; ++i) {
    h1 = h1 + pullback(map, fx.a_i[i]) * fx.hat_h_theta[i];
  }

  BadSetCheck& chk_good = add_check("good-covered");
  BadSetCheck& chk_bad = add_check("bad-covered");
  BadSetCheck& chk_annulus = add_check("annulus");
  BadSetCheck& chk_elsewhere = add_check("elsewhere");
  chk_good.margin = chk_bad.margin = chk_annulus.margin = chk_elsewhere.margin =
      std::numeric_limits<double>::infinity();

  std::vector<std::set<PointId>> annuli;
  for (std::size_t i = 0; i < n_regions; ++i) {
    std::set<PointId> a;
    for (const auto& y : fx.W_prime[i]) {
      if (!in(fx.W_bar[i], y)) a.insert(y);
    }
    annuli.push_back(std::move(a));
  }

  for (const auto& x : space_x.points()) {
    const PointId& y = map.apply(x);
    double v = std::abs(h1.at(x));
    if (in_union(fx.W_bar, y)) {
      double ind_c1 = in(fx.C1, y) ? 1.0 : 0.0;
      if (in(fx.good, x)) {
        record(chk_good, x, v, (1.0 + fx.eps3) * fx.eps1 * fx.c_prime_G * ind_c1);
      } else if (in(fx.bad, x)) {
        record(chk_bad, x, v, (1.0 + fx.eps3) * fx.c_G * fx.c_prime_G * ind_c1);
      }
    } else if (in_union(annuli, y)) {
      record(chk_annulus, x, v, (1.0 + fx.eps3) * fx.M_const * fx.N_const);
    } else {
      double sum_abs = 0.0;
      for (std::size_t i = 0; i < n_regions; ++i) {
        sum_abs += std::abs(fx.hat_h_theta[i].at(x));
      }
      record(chk_elsewhere, x, v, fx.eps3 * sum_abs);
    }
  }

  // h' = h1 + eps3 * M * N * h2: nonnegative on C1, >= 1 on bad cap C1.
  SampledFunction h_prime =
      h1 + fx.hat_h2 * Complex(fx.eps3 * fx.M_const * fx.N_const);
  BadSetCheck& chk_sign = add_check("h-prime-nonnegative-on-C1");
  BadSetCheck& chk_one = add_check("h-prime-at-least-1-on-bad-C1");
  chk_sign.margin = chk_one.margin = std::numeric_limits<double>::infinity();
  for (const auto& x : space_x.points()) {
    if (!in(fx.C1, map.apply(x))) continue;
    double v = h_prime.at(x).real();
    record(chk_sign, x, -v, 0.0);
    if (in(fx.bad, x)) record(chk_one, x, 1.0 - v, 0.0);
  }

  BadSetCheck& chk_mass = add_check("h-prime-mass");
  chk_mass.margin = std::numeric_limits<double>::infinity();
  report.h_prime_mass = integrate(h_prime, fx.system.measure_upstairs()).real();
  record(chk_mass, "", report.h_prime_mass, fx.eps_total / 2.0);

  report.all_pass = true;
  for (const auto& c : report.checks) report.all_pass = report.all_pass && c.pass;
  return report;
}

}  // namespace fibenv
