#include "fibenv/functions.hpp"

#include <algorithm>
#include <cmath>

#include "fibenv/errors.hpp"

namespace fibenv {

namespace {

Complex inner(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double norm2(const std::vector<Complex>& a) {
  double s = 0.0;
  for (const auto& v : a) s += std::norm(v);
  return std::sqrt(s);
}

}  // namespace

SampledFunction::SampledFunction(FiniteSpace space, std::vector<Complex> values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (values_.size() != space_.size()) {
    throw ConfigError("value vector length does not match the space");
  }
  for (const auto& v : values_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw ConfigError("sampled function has a non-finite value");
    }
  }
  if (space_.infinity_point()) {
    std::size_t i = space_.index_of(*space_.infinity_point());
    if (values_[i] != Complex(0.0)) {
      throw ConfigError("sampled function does not vanish at the infinity point");
    }
  }
}

SampledFunction SampledFunction::zero(const FiniteSpace& space) {
  return SampledFunction(space, std::vector<Complex>(space.size(), Complex(0.0)));
}

SampledFunction SampledFunction::constant(const FiniteSpace& space, Complex value) {
  std::vector<Complex> vals(space.size(), value);
  if (space.infinity_point()) {
    vals[space.index_of(*space.infinity_point())] = 0.0;
  }
  return SampledFunction(space, std::move(vals));
}

SampledFunction SampledFunction::indicator(const FiniteSpace& space, const PointId& id) {
  std::vector<Complex> vals(space.size(), Complex(0.0));
  vals[space.index_of(id)] = 1.0;
  if (space.is_infinity(id)) {
    throw ConfigError("indicator of the infinity point is not admissible");
  }
  return SampledFunction(space, std::move(vals));
}

bool SampledFunction::is_real(double tol) const {
  for (const auto& v : values_) {
    if (std::abs(v.imag()) > tol) return false;
  }
  return true;
}

SampledFunction SampledFunction::conjugate() const {
  std::vector<Complex> vals(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) vals[i] = std::conj(values_[i]);
  return SampledFunction(space_, std::move(vals));
}

SampledFunction SampledFunction::abs() const {
  std::vector<Complex> vals(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) vals[i] = std::abs(values_[i]);
  return SampledFunction(space_, std::move(vals));
}

void SampledFunction::check_compatible(const SampledFunction& other) const {
  if (!space_.same_as(other.space_)) {
    throw ConfigError("operation on functions over different spaces");
  }
}

SampledFunction SampledFunction::operator+(const SampledFunction& other) const {
  check_compatible(other);
  std::vector<Complex> vals(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) vals[i] = values_[i] + other.values_[i];
  return SampledFunction(space_, std::move(vals));
}

SampledFunction SampledFunction::operator-(const SampledFunction& other) const {
  check_compatible(other);
  std::vector<Complex> vals(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) vals[i] = values_[i] - other.values_[i];
  return SampledFunction(space_, std::move(vals));
}

SampledFunction SampledFunction::operator*(const SampledFunction& other) const {
  check_compatible(other);
  std::vector<Complex> vals(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) vals[i] = values_[i] * other.values_[i];
  return SampledFunction(space_, std::move(vals));
}

SampledFunction SampledFunction::operator*(Complex scalar) const {
  std::vector<Complex> vals(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) vals[i] = values_[i] * scalar;
  return SampledFunction(space_, std::move(vals));
}

double sup_norm(const SampledFunction& f) {
  double m = 0.0;
  for (const auto& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

Complex integrate(const SampledFunction& f, const WeightedMeasure& mu) {
  if (!f.space().same_as(mu.space())) {
    throw ConfigError("integrate: function and measure live on different spaces");
  }
  Complex s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    s += f.at_index(i) * mu.weight(f.space().point_at(i));
  }
  return s;
}

NormReport norms(const SampledFunction& f, const WeightedMeasure& mu) {
  NormReport r;
  r.sup_norm = sup_norm(f);
  r.l1_norm = integrate(f.abs(), mu).real();
  return r;
}

SampledFunction pullback(const FiberedMap& map, const SampledFunction& f) {
  if (!f.space().same_as(map.target())) {
    throw ConfigError("pullback: function does not live on the map target");
  }
  std::vector<Complex> vals(map.source().size());
  for (std::size_t i = 0; i < map.source().size(); ++i) {
    vals[i] = f.at(map.apply(map.source().point_at(i)));
  }
  return SampledFunction(map.source(), std::move(vals));
}

SampledFunction restrict_to_fiber(const SampledFunction& f,
                                  const std::vector<PointId>& fiber) {
  std::vector<Complex> vals;
  vals.reserve(fiber.size());
  for (const auto& x : fiber) vals.push_back(f.at(x));  // throws on unknown id
  return SampledFunction(FiniteSpace(fiber), std::move(vals));
}

std::vector<SampledFunction> orthonormalize(
    const std::vector<SampledFunction>& columns) {
  std::vector<SampledFunction> basis;
  if (columns.empty()) return basis;
  double max_norm = 0.0;
  for (const auto& c : columns) max_norm = std::max(max_norm, norm2(c.values()));
  if (max_norm == 0.0) return basis;
  const double cutoff = 1e-10 * max_norm;

  std::vector<std::vector<Complex>> q;
  for (const auto& col : columns) {
    std::vector<Complex> v = col.values();
    // Two rounds of modified Gram-Schmidt; the fixed order makes the output
    // reproducible bit for bit.
    for (int round = 0; round < 2; ++round) {
      for (const auto& e : q) {
        Complex coeff = inner(e, v);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= coeff * e[i];
      }
    }
    double n = norm2(v);
    if (n <= cutoff) continue;
    for (auto& x : v) x /= n;
    q.push_back(std::move(v));
  }
  basis.reserve(q.size());
  for (auto& e : q) basis.emplace_back(columns.front().space(), std::move(e));
  return basis;
}

SampledFunction project_onto_span(const SampledFunction& f,
                                  const std::vector<SampledFunction>& onb,
                                  double* residual_sup) {
  SampledFunction proj = SampledFunction::zero(f.space());
  for (const auto& e : onb) {
    Complex coeff = inner(e.values(), f.values());
    proj = proj + e * coeff;
  }
  if (residual_sup) *residual_sup = sup_norm(f - proj);
  return proj;
}

BaseAlgebra::BaseAlgebra(FiniteSpace space, std::vector<SampledFunction> generators,
                         int closure_degree)
    : space_(std::move(space)),
      generators_(std::move(generators)),
      closure_degree_(closure_degree) {
  if (closure_degree_ < 1) throw ArgumentError("closure degree must be positive");
  for (const auto& g : generators_) {
    if (!g.space().same_as(space_)) {
      throw ConfigError("algebra generator lives on the wrong space");
    }
  }
  work_generators_ = generators_;
  for (const auto& g : generators_) {
    if (!g.is_real(0.0)) work_generators_.push_back(g.conjugate());
  }
  basis_ = orthonormalize(monomials());
}

std::vector<SampledFunction> BaseAlgebra::monomials() const {
  // Degree ascending; within a degree, nondecreasing generator-index words in
  // lexicographic order.
  std::vector<SampledFunction> out;
  if (work_generators_.empty()) return out;
  std::vector<std::pair<SampledFunction, std::size_t>> current;  // (product, last index)
  for (std::size_t i = 0; i < work_generators_.size(); ++i) {
    current.emplace_back(work_generators_[i], i);
  }
  for (int d = 1; d <= closure_degree_; ++d) {
    for (const auto& [f, last] : current) out.push_back(f);
    if (d == closure_degree_) break;
    std::vector<std::pair<SampledFunction, std::size_t>> next;
    for (const auto& [f, last] : current) {
      for (std::size_t j = last; j < work_generators_.size(); ++j) {
        next.emplace_back(f * work_generators_[j], j);
      }
    }
    current = std::move(next);
  }
  return out;
}

bool BaseAlgebra::generators_vanish_at_infinity() const {
  if (!space_.infinity_point()) return true;
  for (const auto& g : generators_) {
    if (g.at(*space_.infinity_point()) != Complex(0.0)) return false;
  }
  return true;
}

PullbackModule::PullbackModule(FiberedSystem system, BaseAlgebra algebra,
                               std::vector<SampledFunction> module_generators,
                               int closure_degree)
    : system_(std::move(system)),
      algebra_(std::move(algebra)),
      module_generators_(std::move(module_generators)),
      closure_degree_(closure_degree) {
  if (closure_degree_ < 1) throw ArgumentError("closure degree must be positive");
  if (!algebra_.space().same_as(system_.map().target())) {
    throw ConfigError("algebra lives on a different space than the map target");
  }
  for (const auto& g : module_generators_) {
    if (!g.space().same_as(system_.map().source())) {
      throw ConfigError("module generator lives on the wrong space");
    }
  }
  basis_ = materialize_basis(*this);
  // Real span: re/im parts of the complex basis, re-orthonormalized.
  std::vector<SampledFunction> parts;
  for (const auto& b : basis_) {
    parts.push_back((b + b.conjugate()) * Complex(0.5));
    parts.push_back((b - b.conjugate()) * Complex(0.0, -0.5));
  }
  real_basis_ = orthonormalize(parts);
}

std::vector<SampledFunction> materialize_basis(const PullbackModule& module) {
  std::vector<SampledFunction> gens = module.module_generators();
  for (const auto& g : module.module_generators()) {
    if (!g.is_real(0.0)) gens.push_back(g.conjugate());
  }
  bool all_zero = true;
  for (const auto& g : gens) {
    if (sup_norm(g) != 0.0) all_zero = false;
  }
  if (gens.empty() || all_zero) return {};  // degenerate input

  std::vector<SampledFunction> columns;
  std::vector<SampledFunction> algebra_monomials;
  {
    // Algebra monomials up to the module's own degree budget.
    BaseAlgebra capped(module.algebra().space(), module.algebra().generators(),
                       module.closure_degree());
    algebra_monomials = capped.monomials();
  }
  for (const auto& m : gens) {
    columns.push_back(m);  // degree-0 monomial (empty product)
    for (const auto& a : algebra_monomials) {
      columns.push_back(pullback(module.system().map(), a) * m);
    }
  }
  return orthonormalize(columns);
}

bool conjugate_closure_check(const PullbackModule& module) {
  for (const auto& b : module.basis()) {
    double res = 0.0;
    project_onto_span(b.conjugate(), module.basis(), &res);
    if (res > 1e-9) return false;
  }
  return true;
}

}  // namespace fibenv
