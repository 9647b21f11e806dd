#include "fibenv/cheb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fibenv/errors.hpp"

namespace fibenv {

namespace {

struct RestrictedBasis {
  std::vector<std::size_t> selected;              // indices into the input basis
  std::vector<std::vector<Complex>> columns;      // values on the point subset
};

// Maximal linearly independent subset of the basis restricted to the point
// subset, chosen greedily in input order so the selection is deterministic.
RestrictedBasis select_independent(const std::vector<SampledFunction>& basis,
                                   const FiniteSpace& space,
                                   const std::vector<PointId>& points) {
  RestrictedBasis out;
  std::vector<std::vector<Complex>> q;
  double max_norm = 0.0;
  std::vector<std::vector<Complex>> restricted;
  for (const auto& b : basis) {
    std::vector<Complex> col;
    col.reserve(points.size());
    for (const auto& x : points) col.push_back(b.at(x));
    double n2 = 0.0;
    for (const auto& v : col) n2 += std::norm(v);
    max_norm = std::max(max_norm, std::sqrt(n2));
    restricted.push_back(std::move(col));
  }
  const double cutoff = 1e-10 * std::max(max_norm, 1e-300);
  for (std::size_t k = 0; k < restricted.size(); ++k) {
    std::vector<Complex> v = restricted[k];
    for (const auto& e : q) {
      Complex coeff = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) coeff += std::conj(e[i]) * v[i];
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= coeff * e[i];
    }
    double n2 = 0.0;
    for (const auto& x : v) n2 += std::norm(x);
    double n = std::sqrt(n2);
    if (n <= cutoff) continue;
    for (auto& x : v) x /= n;
    q.push_back(std::move(v));
    out.selected.push_back(k);
    out.columns.push_back(restricted[k]);
  }
  return out;
}

bool all_real(const std::vector<Complex>& vals) {
  for (const auto& v : vals) {
    if (v.imag() != 0.0) return false;
  }
  return true;
}

ChebSolution finish(const SampledFunction& f,
                    const std::vector<SampledFunction>& basis,
                    const std::vector<PointId>& points,
                    std::vector<Complex> coeffs) {
  ChebSolution sol;
  sol.coefficients = std::move(coeffs);
  double dist = 0.0;
  std::vector<double> errs;
  errs.reserve(points.size());
  for (const auto& x : points) {
    Complex e = f.at(x);
    for (std::size_t k = 0; k < basis.size(); ++k) e -= sol.coefficients[k] * basis[k].at(x);
    errs.push_back(std::abs(e));
    dist = std::max(dist, errs.back());
  }
  sol.distance = dist;
  const double tol = 1e-9 + 1e-9 * dist;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (errs[i] >= dist - tol) sol.active_points.push_back(points[i]);
  }
  return sol;
}

}  // namespace

ChebSolution cheb_best_approx(const SampledFunction& f,
                              const std::vector<SampledFunction>& basis,
                              const std::vector<PointId>& points) {
  if (points.empty()) throw ArgumentError("cheb_best_approx: empty point subset");
  for (const auto& b : basis) {
    if (!b.space().same_as(f.space())) {
      throw ConfigError("cheb_best_approx: basis element on a different space");
    }
  }
  if (basis.empty()) {
    return finish(f, basis, points, {});
  }

  RestrictedBasis rb = select_independent(basis, f.space(), points);
  const std::size_t kk = rb.selected.size();
  if (kk == 0) {
    return finish(f, basis, points, std::vector<Complex>(basis.size(), 0.0));
  }

  std::vector<Complex> fvals;
  fvals.reserve(points.size());
  for (const auto& x : points) fvals.push_back(f.at(x));

  bool real_case = all_real(fvals);
  for (const auto& col : rb.columns) real_case = real_case && all_real(col);

  std::vector<Complex> full_coeffs(basis.size(), 0.0);

  if (real_case) {
    // Variables: [t, c_1..c_kk]; minimize t with |error| <= t at each point.
    LpProblem lp(1 + kk);
    std::vector<double> obj(1 + kk, 0.0);
    obj[0] = 1.0;
    lp.set_objective(obj);
    for (std::size_t i = 0; i < points.size(); ++i) {
      std::vector<double> up(1 + kk, 0.0), dn(1 + kk, 0.0);
      up[0] = -1.0;
      dn[0] = -1.0;
      for (std::size_t k = 0; k < kk; ++k) {
        up[1 + k] = -rb.columns[k][i].real();
        dn[1 + k] = rb.columns[k][i].real();
      }
      lp.add_constraint(up, Relation::LessEq, -fvals[i].real());
      lp.add_constraint(dn, Relation::LessEq, fvals[i].real());
    }
    LpResult res = lp.solve();
    if (res.status != LpStatus::Optimal) {
      throw ResolutionError("cheb_best_approx: LP did not reach an optimum");
    }
    for (std::size_t k = 0; k < kk; ++k) full_coeffs[rb.selected[k]] = res.x[1 + k];
    return finish(f, basis, points, std::move(full_coeffs));
  }

  // Complex case: Lawson iteration. Each step solves a weighted least-squares
  // problem; the weighted residual norm is a certified lower bound on the
  // minimax value (weights lie in the simplex), while the max residual is an
  // upper bound, so the gap between the two certifies convergence.
  const std::size_t n = points.size();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));

  // Weighted least squares via modified Gram-Schmidt on sqrt(w)-scaled columns.
  auto weighted_ls = [&](const std::vector<double>& wt) -> std::vector<Complex> {
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = std::sqrt(wt[i]);
    std::vector<std::vector<Complex>> q;
    std::vector<std::size_t> kept;
    std::vector<std::vector<Complex>> r_rows;  // R entries for kept columns
    for (std::size_t k = 0; k < kk; ++k) {
      std::vector<Complex> v(n);
      double orig2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = s[i] * rb.columns[k][i];
        orig2 += std::norm(v[i]);
      }
      std::vector<Complex> rcol(q.size());
      for (int round = 0; round < 2; ++round) {
        for (std::size_t j = 0; j < q.size(); ++j) {
          Complex c = 0.0;
          for (std::size_t i = 0; i < n; ++i) c += std::conj(q[j][i]) * v[i];
          for (std::size_t i = 0; i < n; ++i) v[i] -= c * q[j][i];
          rcol[j] += c;
        }
      }
      double n2 = 0.0;
      for (const auto& x : v) n2 += std::norm(x);
      double norm = std::sqrt(n2);
      if (norm <= 1e-13 * std::sqrt(std::max(orig2, 1e-300))) continue;
      for (auto& x : v) x /= norm;
      for (std::size_t j = 0; j < q.size(); ++j) {
        if (r_rows[j].size() < kept.size() + 1) r_rows[j].resize(kept.size() + 1, 0.0);
        r_rows[j][kept.size()] = rcol[j];
      }
      q.push_back(std::move(v));
      r_rows.emplace_back(kept.size() + 1, 0.0);
      r_rows.back()[kept.size()] = norm;
      kept.push_back(k);
    }
    std::vector<Complex> y(q.size(), 0.0);
    for (std::size_t j = 0; j < q.size(); ++j) {
      for (std::size_t i = 0; i < n; ++i) y[j] += std::conj(q[j][i]) * s[i] * fvals[i];
    }
    std::vector<Complex> ck(q.size(), 0.0);
    for (std::size_t j = q.size(); j-- > 0;) {
      Complex acc = y[j];
      for (std::size_t l = j + 1; l < q.size(); ++l) acc -= r_rows[j][l] * ck[l];
      ck[j] = acc / r_rows[j][j];
    }
    std::vector<Complex> coeffs(kk, 0.0);
    for (std::size_t j = 0; j < q.size(); ++j) coeffs[kept[j]] = ck[j];
    return coeffs;
  };

  std::vector<Complex> best_c(kk, 0.0);
  double best_ub = std::numeric_limits<double>::infinity();
  double best_lb = 0.0;
  int since_improved = 0;
  for (int iter = 0; iter < 20000; ++iter) {
    std::vector<Complex> c = weighted_ls(w);
    std::vector<double> mag(n);
    double ub = 0.0, lb2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex e = fvals[i];
      for (std::size_t k = 0; k < kk; ++k) e -= c[k] * rb.columns[k][i];
      mag[i] = std::abs(e);
      ub = std::max(ub, mag[i]);
      lb2 += w[i] * mag[i] * mag[i];
    }
    best_lb = std::max(best_lb, std::sqrt(lb2));
    if (ub < best_ub - 1e-13 * (1.0 + ub)) {
      since_improved = 0;
    } else {
      ++since_improved;
    }
    if (ub < best_ub) {
      best_ub = ub;
      best_c = c;
    }
    if (best_ub <= best_lb + 1e-10 * (1.0 + best_ub)) break;
    if (best_ub <= 1e-14) break;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] *= mag[i];
      sum += w[i];
    }
    if (sum <= 0.0) break;  // exact interpolation
    for (auto& wi : w) wi /= sum;
    // Floor the weights: a support point whose weight collapses to exact zero
    // can never recover under the multiplicative update, and near-zero weights
    // make the scaled QR numerically rank-deficient, which silently breaks
    // both the iterate and the lower-bound certificate.
    sum = 0.0;
    for (auto& wi : w) {
      wi = std::max(wi, 1e-12);
      sum += wi;
    }
    for (auto& wi : w) wi /= sum;
    if (since_improved >= 300) {
      // A support point whose weight collapsed to zero can never recover via
      // the multiplicative update; re-seed weights near the current maxima.
      for (std::size_t i = 0; i < n; ++i) {
        if (mag[i] >= 0.9 * best_ub) w[i] = std::max(w[i], 1e-6);
      }
      sum = 0.0;
      for (double wi : w) sum += wi;
      for (auto& wi : w) wi /= sum;
      since_improved = 0;
    }
  }

  for (std::size_t k = 0; k < kk; ++k) full_coeffs[rb.selected[k]] = best_c[k];
  return finish(f, basis, points, std::move(full_coeffs));
}

ChebSolution cheb_best_approx(const SampledFunction& f,
                              const std::vector<SampledFunction>& basis) {
  return cheb_best_approx(f, basis, f.space().points());
}

FeasibilityCertificate envelope_feasible(const SampledFunction& h,
                                         const std::vector<SampledFunction>& real_basis,
                                         const WeightedMeasure& mu, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("envelope_feasible: eps must be positive");
  if (!h.space().same_as(mu.space())) {
    throw ConfigError("envelope_feasible: function and measure on different spaces");
  }
  constexpr double kSlack = 1e-9;  // realizes the strict inequality mu(m) < eps

  FeasibilityCertificate cert;
  const std::size_t kk = real_basis.size();
  LpProblem lp(kk);
  std::vector<double> obj(kk, 0.0);
  for (std::size_t k = 0; k < kk; ++k) {
    obj[k] = integrate(real_basis[k], mu).real();
  }
  lp.set_objective(obj);
  const auto& pts = h.space().points();
  for (const auto& x : pts) {
    std::vector<double> row(kk, 0.0);
    for (std::size_t k = 0; k < kk; ++k) row[k] = real_basis[k].at(x).real();
    lp.add_constraint(row, Relation::GreaterEq, std::abs(h.at(x)));
  }
  LpResult res = lp.solve();
  if (res.status == LpStatus::Infeasible) {
    cert.feasible = false;
    cert.min_mass = std::numeric_limits<double>::infinity();
    cert.detail = "no dominating element exists; separating point '" +
                  pts[res.violated_row % pts.size()] + "'";
    return cert;
  }
  if (res.status == LpStatus::Unbounded) {
    throw ResolutionError("envelope_feasible: dominator LP unbounded");
  }
  cert.min_mass = res.objective;
  if (res.objective <= eps - kSlack) {
    cert.feasible = true;
    cert.witness_coefficients = res.x;
    SampledFunction m = SampledFunction::zero(h.space());
    for (std::size_t k = 0; k < kk; ++k) m = m + real_basis[k] * Complex(res.x[k]);
    cert.achieved_mass = integrate(m, mu).real();
    cert.witness = std::move(m);
  } else {
    cert.feasible = false;
    cert.detail = "minimum dominator mass exceeds eps";
  }
  return cert;
}

ChebSolution brute_force_cheb_oracle(const SampledFunction& f,
                                     const std::vector<SampledFunction>& basis,
                                     const std::vector<PointId>& points,
                                     double grid_radius, int grid_steps) {
  if (basis.size() > 3) {
    throw ArgumentError("brute_force_cheb_oracle: basis dimension must be <= 3");
  }
  if (grid_steps < 2 || grid_steps > 201) {
    throw ArgumentError("brute_force_cheb_oracle: grid_steps out of range");
  }
  std::vector<std::vector<double>> cols;
  std::vector<double> fvals;
  for (const auto& x : points) {
    Complex v = f.at(x);
    if (v.imag() != 0.0) {
      throw ArgumentError("brute_force_cheb_oracle: real instances only");
    }
    fvals.push_back(v.real());
  }
  for (const auto& b : basis) {
    std::vector<double> col;
    for (const auto& x : points) {
      Complex v = b.at(x);
      if (v.imag() != 0.0) {
        throw ArgumentError("brute_force_cheb_oracle: real instances only");
      }
      col.push_back(v.real());
    }
    cols.push_back(std::move(col));
  }

  const std::size_t dim = basis.size();
  std::vector<int> idx(dim, 0);
  std::vector<double> best_c(dim, 0.0);
  double best = std::numeric_limits<double>::infinity();
  auto coeff_at = [&](int step) {
    return -grid_radius + 2.0 * grid_radius * step / (grid_steps - 1);
  };
  for (;;) {
    double worst = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double e = fvals[i];
      for (std::size_t k = 0; k < dim; ++k) e -= coeff_at(idx[k]) * cols[k][i];
      worst = std::max(worst, std::abs(e));
    }
    if (worst < best) {
      best = worst;
      for (std::size_t k = 0; k < dim; ++k) best_c[k] = coeff_at(idx[k]);
    }
    std::size_t k = 0;
    while (k < dim && ++idx[k] == grid_steps) idx[k++] = 0;
    if (k == dim) break;
    if (dim == 0) break;
  }

  std::vector<Complex> coeffs(dim);
  for (std::size_t k = 0; k < dim; ++k) coeffs[k] = best_c[k];
  return finish(f, basis, points, std::move(coeffs));
}

}  // namespace fibenv
