#include "fibenv/localization.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fibenv/errors.hpp"

namespace fibenv {

namespace {

// Generating columns of internal degree < D_M: these are the elements whose
// products with a pulled-back algebra generator must stay in the span.
std::vector<SampledFunction> low_degree_columns(const PullbackModule& module) {
  std::vector<SampledFunction> gens = module.module_generators();
  for (const auto& g : module.module_generators()) {
    if (!g.is_real(0.0)) gens.push_back(g.conjugate());
  }
  std::vector<SampledFunction> columns = gens;
  if (module.closure_degree() > 1) {
    BaseAlgebra capped(module.algebra().space(), module.algebra().generators(),
                       module.closure_degree() - 1);
    for (const auto& m : gens) {
      for (const auto& a : capped.monomials()) {
        columns.push_back(pullback(module.system().map(), a) * m);
      }
    }
  }
  return columns;
}

}  // namespace

PreflightReport preflight(const PullbackModule& module) {
  PreflightReport report;
  const auto& algebra = module.algebra();
  const auto& space_y = algebra.space();

  report.algebra_dense = true;
  for (const auto& y : space_y.points()) {
    if (space_y.is_infinity(y)) continue;
    ChebSolution sol = cheb_best_approx(SampledFunction::indicator(space_y, y),
                                        algebra.basis());
    report.worst_density_residual =
        std::max(report.worst_density_residual, sol.distance);
  }
  report.algebra_dense = report.worst_density_residual <= 1e-8;

  report.module_stable = true;
  if (!module.degenerate()) {
    for (const auto& col : low_degree_columns(module)) {
      for (const auto& a : algebra.generators()) {
        SampledFunction prod = pullback(module.system().map(), a) * col;
        double scale = sup_norm(prod);
        if (scale == 0.0) continue;
        double res = 0.0;
        project_onto_span(prod, module.basis(), &res);
        report.worst_stability_residual =
            std::max(report.worst_stability_residual, res / scale);
      }
    }
    report.module_stable = report.worst_stability_residual <= 1e-9;
  }

  report.conjugation_closed = conjugate_closure_check(module);
  return report;
}

LocalizationReport localize_distance(const SampledFunction& f,
                                     const PullbackModule& module,
                                     ExecutionMode mode) {
  if (!f.space().same_as(module.source_space())) {
    throw ConfigError("localize_distance: function is not on the source space");
  }
  LocalizationReport report;
  PreflightReport pf = preflight(module);
  report.hypotheses_ok = pf.ok();
  report.flagged = !pf.ok();

  report.global_distance = cheb_best_approx(f, module.basis()).distance;

  const auto fibers = fibers_of(module.system().map());
  std::vector<std::pair<PointId, std::vector<PointId>>> fiber_list(fibers.begin(),
                                                                   fibers.end());
  std::vector<double> dist(fiber_list.size(), 0.0);

  auto solve_fiber = [&](std::size_t i) {
    const auto& fiber = fiber_list[i].second;
    if (fiber.empty()) return;
    SampledFunction f_restr = restrict_to_fiber(f, fiber);
    std::vector<SampledFunction> basis_restr;
    basis_restr.reserve(module.basis().size());
    for (const auto& b : module.basis()) {
      basis_restr.push_back(restrict_to_fiber(b, fiber));
    }
    dist[i] = cheb_best_approx(f_restr, basis_restr).distance;
  };

  if (mode == ExecutionMode::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < fiber_list.size(); ++i) solve_fiber(i);
  } else {
    for (std::size_t i = 0; i < fiber_list.size(); ++i) solve_fiber(i);
  }

  for (std::size_t i = 0; i < fiber_list.size(); ++i) {
    if (fiber_list[i].second.empty()) continue;
    report.fiber_distances[fiber_list[i].first] = dist[i];
    report.sup_fiber_distance = std::max(report.sup_fiber_distance, dist[i]);
  }
  report.gap = report.global_distance - report.sup_fiber_distance;

  if (report.hypotheses_ok) {
    double tol = 1e-6 * (1.0 + sup_norm(f));
    if (std::abs(report.gap) > tol) {
      throw ResolutionError(
          "localization equality violated beyond tolerance despite passed "
          "preflight; gap = " +
          std::to_string(report.gap));
    }
  }
  return report;
}

PartitionApproximant construct_approximant(const SampledFunction& f,
                                           const PullbackModule& module,
                                           double eps) {
  if (!(eps > 0.0)) throw ArgumentError("construct_approximant: eps must be positive");
  PreflightReport pf = preflight(module);
  if (!pf.ok()) {
    throw HypothesisError("construct_approximant: module hypotheses fail preflight");
  }

  PartitionApproximant out;
  const auto fibers = fibers_of(module.system().map());

  // Stage 1: per fiber, a module element within the fiberwise optimum.
  double d_sup = 0.0;
  double max_local_norm = 0.0;
  std::vector<std::pair<PointId, SampledFunction>> locals;
  for (const auto& [y, fiber] : fibers) {
    if (fiber.empty()) continue;
    SampledFunction f_restr = restrict_to_fiber(f, fiber);
    std::vector<SampledFunction> basis_restr;
    for (const auto& b : module.basis()) basis_restr.push_back(restrict_to_fiber(b, fiber));
    ChebSolution sol = cheb_best_approx(f_restr, basis_restr);
    d_sup = std::max(d_sup, sol.distance);
    SampledFunction g = SampledFunction::zero(module.source_space());
    for (std::size_t k = 0; k < module.basis().size(); ++k) {
      g = g + module.basis()[k] * sol.coefficients[k];
    }
    max_local_norm = std::max(max_local_norm, sup_norm(g));
    locals.emplace_back(y, std::move(g));
  }
  const std::size_t n_regions = locals.size();
  if (n_regions == 0) {
    out.assembled = SampledFunction::zero(module.source_space());
    return out;
  }

  // Stage 2: replace the exact fiber indicators by algebra elements within
  // the remaining half of the budget.
  const double sigma_budget =
      eps / (4.0 * (1.0 + max_local_norm) * static_cast<double>(n_regions));
  out.assembled = SampledFunction::zero(module.source_space());
  double worst_sigma_residual = 0.0;
  PointId worst_region;
  for (auto& [y, g] : locals) {
    SampledFunction rho = SampledFunction::indicator(module.algebra().space(), y);
    ChebSolution sol = cheb_best_approx(rho, module.algebra().basis());
    if (sol.distance > worst_sigma_residual) {
      worst_sigma_residual = sol.distance;
      worst_region = y;
    }
    SampledFunction sigma = SampledFunction::zero(module.algebra().space());
    for (std::size_t k = 0; k < module.algebra().basis().size(); ++k) {
      sigma = sigma + module.algebra().basis()[k] * sol.coefficients[k];
    }
    out.regions.push_back(y);
    out.sigma.push_back(sigma);
    out.locals.push_back(g);
    out.assembled = out.assembled + pullback(module.system().map(), sigma) * g;
  }
  if (worst_sigma_residual > sigma_budget) {
    throw HypothesisError(
        "construct_approximant: algebra cannot meet the indicator budget; worst "
        "residual " + std::to_string(worst_sigma_residual) + " at region '" +
        worst_region + "' (budget " + std::to_string(sigma_budget) + ")");
  }

  out.achieved_error = sup_norm(f - out.assembled);
  out.target_error = d_sup + eps;
  project_onto_span(out.assembled, module.basis(), &out.span_residual);
  return out;
}

std::string localization_csv(const LocalizationReport& report,
                             const PullbackModule& module) {
  const auto fibers = fibers_of(module.system().map());
  std::ostringstream os;
  os << "fiber_id,fiber_size,fiber_distance\r\n";
  os.precision(17);
  for (const auto& [y, d] : report.fiber_distances) {
    os << y << "," << fibers.at(y).size() << "," << d << "\r\n";
  }
  return os.str();
}

}  // namespace fibenv
