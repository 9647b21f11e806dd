#include "fibenv/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fibenv/errors.hpp"

namespace fibenv {

namespace {

void require_real(const SampledFunction& f, const char* who) {
  if (!f.is_real(0.0)) {
    throw ArgumentError(std::string(who) + ": real-valued input required");
  }
}

SampledFunction combine(const std::vector<SampledFunction>& basis,
                        const std::vector<double>& coeffs,
                        const FiniteSpace& space) {
  SampledFunction out = SampledFunction::zero(space);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    out = out + basis[k] * Complex(coeffs[k]);
  }
  return out;
}

struct DominatorResult {
  bool feasible = false;
  SampledFunction n;
  double mass = 0.0;
  PointId separating_point;
};

// minimize mu(n) over the real span subject to n >= |m| pointwise.
DominatorResult dominator_lp(const SampledFunction& m,
                             const std::vector<SampledFunction>& real_basis,
                             const WeightedMeasure& mu) {
  DominatorResult out;
  const auto& space = m.space();
  const std::size_t kk = real_basis.size();
  LpProblem lp(kk);
  std::vector<double> obj(kk, 0.0);
  for (std::size_t k = 0; k < kk; ++k) obj[k] = integrate(real_basis[k], mu).real();
  lp.set_objective(obj);
  for (const auto& x : space.points()) {
    std::vector<double> row(kk, 0.0);
    for (std::size_t k = 0; k < kk; ++k) row[k] = real_basis[k].at(x).real();
    lp.add_constraint(row, Relation::GreaterEq, std::abs(m.at(x)));
  }
  LpResult res = lp.solve();
  if (res.status != LpStatus::Optimal) {
    out.feasible = false;
    out.separating_point = space.point_at(res.violated_row % space.size());
    return out;
  }
  out.feasible = true;
  out.n = combine(real_basis, res.x, space);
  out.mass = integrate(out.n, mu).real();
  return out;
}

struct ClosureLpResult {
  bool feasible = false;
  SampledFunction m1;
  SampledFunction m2;
  double mass = 0.0;  // mu(m2) at the optimum
};

// minimize mu(m2) over m1, m2 in the real span subject to |h - m1| <= m2.
ClosureLpResult closure_lp(const SampledFunction& h,
                           const std::vector<SampledFunction>& real_basis,
                           const WeightedMeasure& mu) {
  require_real(h, "closure LP");
  ClosureLpResult out;
  const auto& space = h.space();
  const std::size_t kk = real_basis.size();
  LpProblem lp(2 * kk);  // [a (m1) | b (m2)]
  std::vector<double> obj(2 * kk, 0.0);
  for (std::size_t k = 0; k < kk; ++k) {
    obj[kk + k] = integrate(real_basis[k], mu).real();
  }
  lp.set_objective(obj);
  for (const auto& x : space.points()) {
    std::vector<double> up(2 * kk, 0.0), dn(2 * kk, 0.0);
    for (std::size_t k = 0; k < kk; ++k) {
      double v = real_basis[k].at(x).real();
      up[k] = v;        // m1 + m2 >= h
      up[kk + k] = v;
      dn[k] = -v;       // m2 - m1 >= -h
      dn[kk + k] = v;
    }
    double hv = h.at(x).real();
    lp.add_constraint(up, Relation::GreaterEq, hv);
    lp.add_constraint(dn, Relation::GreaterEq, -hv);
  }
  LpResult res = lp.solve();
  if (res.status != LpStatus::Optimal) return out;
  out.feasible = true;
  std::vector<double> a(res.x.begin(), res.x.begin() + kk);
  std::vector<double> b(res.x.begin() + kk, res.x.end());
  out.m1 = combine(real_basis, a, space);
  out.m2 = combine(real_basis, b, space);
  out.mass = integrate(out.m2, mu).real();
  return out;
}

constexpr double kSlack = 1e-9;

}  // namespace

RiemannIntegrableDescriptor RiemannIntegrableDescriptor::make(
    SampledFunction f, std::set<PointId> bad_points) {
  RiemannIntegrableDescriptor d;
  for (const auto& x : bad_points) (void)f.space().index_of(x);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.at_index(i) != Complex(0.0)) d.support.insert(f.space().point_at(i));
  }
  for (const auto& x : bad_points) d.support.insert(x);
  d.bad_points = std::move(bad_points);
  d.function = std::move(f);
  return d;
}

bool verify_certificate(const SampledFunction& phi, const EnvelopeCertificate& cert,
                        const WeightedMeasure& mu, std::string* why) {
  const auto& space = phi.space();
  for (const auto& x : space.points()) {
    double lhs = std::abs(phi.at(x) - cert.m1.at(x));
    double rhs = cert.m2.at(x).real();
    if (lhs > rhs + kSlack) {
      if (why) *why = "domination fails at '" + x + "'";
      return false;
    }
  }
  double mass = integrate(cert.m2, mu).real();
  if (!(mass < cert.eps)) {
    if (why) *why = "mass " + std::to_string(mass) + " not below eps";
    return false;
  }
  return true;
}

FeasibilityCertificate membership_U_eps(const SampledFunction& h,
                                        const PullbackModule& module,
                                        const WeightedMeasure& mu, double eps) {
  return envelope_feasible(h, module.real_basis(), mu, eps);
}

ClosureReport closure_membership(const SampledFunction& h, const PullbackModule& module,
                                 const WeightedMeasure& mu,
                                 const std::vector<double>& eps_ladder) {
  for (std::size_t i = 0; i < eps_ladder.size(); ++i) {
    if (!(eps_ladder[i] > 0.0)) throw ArgumentError("closure ladder must be positive");
    if (i > 0 && !(eps_ladder[i] < eps_ladder[i - 1])) {
      throw ArgumentError("closure ladder must be strictly decreasing");
    }
  }
  ClosureReport report;
  ClosureLpResult lp = closure_lp(h, module.real_basis(), mu);
  report.min_feasible_mass =
      lp.feasible ? lp.mass : std::numeric_limits<double>::infinity();
  for (double eps : eps_ladder) {
    ClosureRung rung;
    rung.eps = eps;
    rung.feasible = lp.feasible && lp.mass <= eps - kSlack;
    if (rung.feasible) {
      rung.certificate = EnvelopeCertificate{lp.m1, lp.m2, eps, std::nullopt};
    }
    report.rungs.push_back(std::move(rung));
  }
  report.in_closure_at_min_rung =
      !report.rungs.empty() && report.rungs.back().feasible;
  return report;
}

NestingReport verify_nesting(const PullbackModule& module, const WeightedMeasure& mu,
                             const std::vector<std::pair<double, double>>& eps_pairs,
                             const std::vector<SampledFunction>& samples) {
  NestingReport report;
  for (const auto& [eps_prime, eps] : eps_pairs) {
    if (!(eps_prime < eps)) {
      throw ArgumentError("verify_nesting: require eps' < eps strictly");
    }
    const double delta = eps - eps_prime;
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const SampledFunction& h = samples[s];
      // Closure-side dominator for U'_{eps'}: m' = |h| when its mass fits.
      SampledFunction m_prime = h.abs();
      double m_prime_mass = integrate(m_prime, mu).real();
      if (!(m_prime_mass < eps_prime)) continue;  // h not certified in U'_{eps'}
      // Module pair (n1, n2) with |m' - n1| <= n2 and mu(n2) < delta/2.
      ClosureLpResult pair = closure_lp(m_prime, module.real_basis(), mu);
      if (!pair.feasible || !(pair.mass <= delta / 2.0 - kSlack)) continue;
      ++report.witnesses_recombined;
      SampledFunction n = pair.m1 + pair.m2;
      // Recombined witness must certify h in U_eps.
      for (const auto& x : h.space().points()) {
        if (std::abs(h.at(x)) > n.at(x).real() + 1e-7) {
          report.violations.push_back(
              {s, "recombined witness fails domination at '" + x + "'"});
          break;
        }
      }
      double n_mass = integrate(n, mu).real();
      if (!(n_mass < eps)) {
        report.violations.push_back(
            {s, "recombined witness mass " + std::to_string(n_mass) +
                    " not below eps"});
      }
    }
    ++report.pairs_checked;
  }
  return report;
}

SampledFunction find_dominating(const SampledFunction& m, const PullbackModule& module) {
  DominatorResult res = dominator_lp(m, module.real_basis(), module.system().measure_upstairs());
  if (!res.feasible) {
    throw HypothesisError(
        "find_dominating: module violates condition (3); separating point '" +
        res.separating_point + "'");
  }
  return res.n;
}

SampledFunction find_positive_at(const PointId& x, const PullbackModule& module) {
  const double tol = 1e-12;
  for (const auto& r : module.real_basis()) {
    if (std::abs(r.at(x).real()) > tol * (1.0 + sup_norm(r))) {
      SampledFunction n = r;
      SampledFunction m = find_dominating(n, module);
      return m;
    }
  }
  throw HypothesisError("find_positive_at: every module element vanishes at '" +
                        std::string(x) + "'");
}

std::pair<SampledFunction, SampledFunction> bourbaki_sandwich(
    const RiemannIntegrableDescriptor& phi, const WeightedMeasure& mu, double eps1) {
  const auto& f = phi.function;
  const auto& space = f.space();
  std::vector<Complex> c1_vals(space.size()), c2_vals(space.size(), 0.0);
  for (std::size_t i = 0; i < space.size(); ++i) {
    const PointId& x = space.point_at(i);
    Complex v = f.at_index(i);
    if (phi.bad_points.count(x)) {
      // Modeled discontinuity: the function oscillates between its sampled
      // value and the vanishing background, so the midpoint is v/2 and the
      // oscillation envelope is |v|/2.
      c1_vals[i] = v * 0.5;
      c2_vals[i] = std::abs(v) * 0.5;
    } else {
      c1_vals[i] = v;
    }
  }
  SampledFunction c1(space, std::move(c1_vals));
  SampledFunction c2(space, std::move(c2_vals));
  double osc_mass = integrate(c2, mu).real();
  if (osc_mass > eps1) {
    throw ResolutionError(
        "bourbaki_sandwich: oscillation mass " + std::to_string(osc_mass) +
        " exceeds the eps1 budget " + std::to_string(eps1) +
        "; a finer discontinuity model is required");
  }
  return {std::move(c1), std::move(c2)};
}

namespace {

void pipeline_preflight(const PullbackModule& module) {
  if (!conjugate_closure_check(module)) {
    throw HypothesisError("pipeline: condition (1) fails (conjugation closure)");
  }
  const auto fibers = fibers_of(module.system().map());
  for (const auto& [y, fiber] : fibers) {
    if (fiber.empty()) continue;
    std::vector<SampledFunction> restricted;
    for (const auto& b : module.basis()) {
      restricted.push_back(restrict_to_fiber(b, fiber));
    }
    if (orthonormalize(restricted).size() < fiber.size()) {
      throw HypothesisError("pipeline: condition (2) fails (fiberwise density at '" +
                            y + "')");
    }
  }
  for (const auto& r : module.real_basis()) {
    DominatorResult res =
        dominator_lp(r, module.real_basis(), module.system().measure_upstairs());
    if (!res.feasible) {
      throw HypothesisError(
          "pipeline: condition (3) fails; separating point '" +
          res.separating_point + "'");
    }
  }
}

}  // namespace

EnvelopeCertificate main_theorem_pipeline(const RiemannIntegrableDescriptor& phi,
                                          const PullbackModule& module,
                                          const WeightedMeasure& mu, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("pipeline: eps must be positive");
  pipeline_preflight(module);

  const auto& map = module.system().map();
  const auto& space_x = map.source();
  const auto& space_y = map.target();

  // Cutoff c: sharp indicator of p(supp(phi)).
  std::set<PointId> support_image;
  for (const auto& x : phi.support) support_image.insert(map.apply(x));
  SampledFunction c = SampledFunction::zero(space_y);
  for (const auto& y : support_image) {
    c = c + SampledFunction::indicator(space_y, y);
  }
  SampledFunction c_up = pullback(map, c);

  // Dominating module element mc >= pullback(c): assembled from the
  // find_positive_at covers and compared against the LP-minimal dominator;
  // the smaller mass wins.
  SampledFunction mc = SampledFunction::zero(space_x);
  {
    SampledFunction msum = SampledFunction::zero(space_x);
    bool any = false;
    for (const auto& x : space_x.points()) {
      if (c_up.at(x).real() > 0.5) {
        msum = msum + find_positive_at(x, module);
        any = true;
      }
    }
    double scale = 0.0;
    if (any) {
      for (const auto& x : space_x.points()) {
        if (c_up.at(x).real() > 0.5) {
          scale = std::max(scale, c_up.at(x).real() / msum.at(x).real());
        }
      }
    }
    SampledFunction assembled = msum * Complex(scale);
    DominatorResult lp_min = dominator_lp(c_up, module.real_basis(), mu);
    bool assembled_ok = any;
    for (const auto& x : space_x.points()) {
      if (assembled.at(x).real() < c_up.at(x).real() - kSlack ||
          assembled.at(x).real() < -kSlack) {
        assembled_ok = false;
      }
    }
    if (lp_min.feasible && (!assembled_ok ||
                            lp_min.mass <= integrate(assembled, mu).real())) {
      mc = lp_min.n;
    } else if (assembled_ok) {
      mc = assembled;
    } else if (support_image.empty()) {
      mc = SampledFunction::zero(space_x);
    } else {
      throw HypothesisError("pipeline: no dominating element for the cutoff");
    }
  }

  const double mc_sup = sup_norm(mc);
  const double mc_mass = integrate(mc, mu).real();
  // Budget: strictly below the eps/(3||mc|| + mu(mc)) bound, with extra room
  // so the final mass check cannot be defeated by solver slop.
  double eps1 = 0.5 * eps / (3.0 * mc_sup + 3.0 * mc_mass + 1.0);

  for (int attempt = 0; attempt < 6; ++attempt) {
    auto [c1, c2] = bourbaki_sandwich(phi, mu, eps1);

    ChebSolution sol1 = cheb_best_approx(c1, module.basis());
    if (!(sol1.distance < eps1)) {
      throw ResolutionError(
          "pipeline stage sw_m1: achieved residual " +
          std::to_string(sol1.distance) + " is not below eps1 " +
          std::to_string(eps1));
    }
    ChebSolution sol2 = cheb_best_approx(c2, module.basis());
    if (!(sol2.distance < eps1)) {
      throw ResolutionError(
          "pipeline stage sw_m2: achieved residual " +
          std::to_string(sol2.distance) + " is not below eps1 " +
          std::to_string(eps1));
    }
    SampledFunction m1 = SampledFunction::zero(space_x);
    SampledFunction m2 = SampledFunction::zero(space_x);
    for (std::size_t k = 0; k < module.basis().size(); ++k) {
      m1 = m1 + module.basis()[k] * sol1.coefficients[k];
      m2 = m2 + module.basis()[k] * sol2.coefficients[k];
    }

    EnvelopeCertificate cert;
    cert.m1 = c_up * m1;
    cert.m2 = c_up * m2 + mc * Complex(2.0 * eps1);
    cert.eps = eps;

    std::string why;
    if (verify_certificate(phi.function, cert, mu, &why)) {
      BudgetLedger ledger;
      ledger.eps = eps;
      ledger.eps1 = eps1;
      ledger.cutoff_c = c;
      ledger.dominating_mc = mc;
      ledger.sandwich_c1 = c1;
      ledger.sandwich_c2 = c2;
      ledger.sw_m1 = m1;
      ledger.sw_m2 = m2;
      ledger.mc_sup = mc_sup;
      ledger.mc_mass = mc_mass;
      cert.budget = std::move(ledger);
      return cert;
    }
    eps1 *= 0.5;  // tighten and retry
  }
  throw ResolutionError("pipeline: certificate verification failed at every budget");
}

EnvelopeCertificate closure_module_mult(const SampledFunction& c,
                                        const SampledFunction& m,
                                        const PullbackModule& module,
                                        const WeightedMeasure& mu, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("closure_module_mult: eps must be positive");
  DominatorResult dom = dominator_lp(m, module.real_basis(), mu);
  if (!dom.feasible) {
    throw HypothesisError(
        "closure_module_mult: condition (3) fails, no dominating n for m; "
        "separating point '" + dom.separating_point + "'");
  }
  const SampledFunction& n = dom.n;
  const double budget = eps / (1.0 + dom.mass);
  ChebSolution sol = cheb_best_approx(c, module.algebra().basis());
  if (!(sol.distance < budget)) {
    throw HypothesisError(
        "closure_module_mult: no algebra approximant of c within " +
        std::to_string(budget) + " (achieved " + std::to_string(sol.distance) + ")");
  }
  SampledFunction a = SampledFunction::zero(c.space());
  for (std::size_t k = 0; k < module.algebra().basis().size(); ++k) {
    a = a + module.algebra().basis()[k] * sol.coefficients[k];
  }
  const double achieved = sol.distance;
  EnvelopeCertificate cert;
  cert.m1 = pullback(module.system().map(), a) * m;
  cert.m2 = n * Complex(achieved);
  cert.eps = eps;
  return cert;
}

EnvelopeCertificate density_theorem_splice(const RiemannIntegrableDescriptor& phi,
                                           const PullbackModule& module,
                                           const WeightedMeasure& mu,
                                           const SampledFunction& base_cutoff,
                                           const SampledFunction& bad_set_majorant,
                                           double eps) {
  if (!(eps > 0.0)) throw ArgumentError("splice: eps must be positive");
  const auto& map = module.system().map();
  SampledFunction c_up = pullback(map, base_cutoff);
  for (const auto& x : phi.support) {
    if (std::abs(c_up.at(x) - Complex(1.0)) > 1e-12) {
      throw ConfigError("splice: cutoff is not 1 on the support of phi at '" + x + "'");
    }
  }
  const double c_sup = sup_norm(base_cutoff);
  const double eps1 = 0.45 * eps / (c_sup + 1.0);

  // Good-region certificate: the pipeline run on phi with the bad points
  // zeroed out.
  RiemannIntegrableDescriptor good = phi;
  {
    std::vector<Complex> vals(phi.function.values());
    for (const auto& x : phi.bad_points) vals[phi.function.space().index_of(x)] = 0.0;
    good.function = SampledFunction(phi.function.space(), std::move(vals));
    good.bad_points.clear();
    good.support.clear();
    for (std::size_t i = 0; i < good.function.size(); ++i) {
      if (good.function.at_index(i) != Complex(0.0)) {
        good.support.insert(good.function.space().point_at(i));
      }
    }
  }
  EnvelopeCertificate inner = main_theorem_pipeline(good, module, mu, eps1);
  const SampledFunction& M1 = inner.m1;
  const SampledFunction& M2 = inner.m2;

  // Bad-set majorant checks.
  double h3_mass = integrate(bad_set_majorant, mu).real();
  if (!(h3_mass < eps1)) {
    throw ArgumentError("splice: bad-set majorant mass " + std::to_string(h3_mass) +
                        " is not below eps1 " + std::to_string(eps1));
  }
  for (const auto& x : phi.bad_points) {
    double need = std::abs(phi.function.at(x) - c_up.at(x) * M1.at(x)) +
                  (c_up.at(x) * M2.at(x)).real();
    if (need > bad_set_majorant.at(x).real() + kSlack) {
      throw ResolutionError(
          "splice: bad-set majorant too small at '" + x + "' (needs " +
          std::to_string(need) + ")");
    }
  }

  // Land the cutoff products back in the module span.
  EnvelopeCertificate lemma_a =
      closure_module_mult(base_cutoff, M1, module, mu, eps / 8.0);
  EnvelopeCertificate lemma_b =
      closure_module_mult(base_cutoff, M2, module, mu, eps / 8.0);

  EnvelopeCertificate cert;
  cert.m1 = lemma_a.m1;
  cert.m2 = lemma_b.m1 + lemma_b.m2 + lemma_a.m2 + bad_set_majorant;
  cert.eps = eps;
  std::string why;
  if (!verify_certificate(phi.function, cert, mu, &why)) {
    throw ResolutionError("splice: assembled certificate fails re-check: " + why);
  }
  return cert;
}

EnvelopeCertificate splice_double_closure(const SampledFunction& phi,
                                          const PullbackModule& module,
                                          const WeightedMeasure& mu, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("double closure: eps must be positive");
  require_real(phi, "splice_double_closure");

  // Outer certificate at eps/2 with closure-side elements: shift phi halfway
  // toward its span projection so the outer pair genuinely sits outside the
  // module span whenever phi does.
  SampledFunction proj = project_onto_span(phi, module.basis());
  SampledFunction m1_outer = (phi + proj) * Complex(0.5);
  SampledFunction m2_outer = (phi - m1_outer).abs();
  double outer_mass = integrate(m2_outer, mu).real();
  if (!(outer_mass < eps / 2.0)) {
    throw ResolutionError(
        "double closure: phi is too far from the module for the eps/2 outer "
        "certificate (mass " + std::to_string(outer_mass) + ")");
  }

  // Certify each outer element in the closure at eps/8.
  ClosureLpResult u = closure_lp(m1_outer, module.real_basis(), mu);
  ClosureLpResult v = closure_lp(m2_outer, module.real_basis(), mu);
  if (!u.feasible || !(u.mass <= eps / 8.0 - kSlack) || !v.feasible ||
      !(v.mass <= eps / 8.0 - kSlack)) {
    throw ResolutionError("double closure: eps/8 certification of the outer pair failed");
  }

  // Recombine: |phi - u1| <= m2' + u2 <= (v1 + v2) + u2.
  EnvelopeCertificate cert;
  cert.m1 = u.m1;
  cert.m2 = v.m1 + v.m2 + u.m2;
  cert.eps = eps;
  std::string why;
  if (!verify_certificate(phi, cert, mu, &why)) {
    throw ResolutionError("double closure: recombined certificate fails re-check: " + why);
  }
  return cert;
}

}  // namespace fibenv
