#pragma once

#include <complex>
#include <vector>

#include "fibenv/space.hpp"

namespace fibenv {

using Complex = std::complex<double>;

// A function sampled on every point of a finite space. Values are stored in
// the space's point order; the value at the infinity point must be zero.
class SampledFunction {
 public:
  SampledFunction() = default;
  SampledFunction(FiniteSpace space, std::vector<Complex> values);

  static SampledFunction zero(const FiniteSpace& space);
  static SampledFunction constant(const FiniteSpace& space, Complex value);
  static SampledFunction indicator(const FiniteSpace& space, const PointId& id);

  const FiniteSpace& space() const { return space_; }
  const std::vector<Complex>& values() const { return values_; }
  Complex at(const PointId& id) const { return values_[space_.index_of(id)]; }
  Complex at_index(std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  bool is_real(double tol = 0.0) const;

  SampledFunction conjugate() const;
  SampledFunction abs() const;  // pointwise modulus (real-valued)

  SampledFunction operator+(const SampledFunction& other) const;
  SampledFunction operator-(const SampledFunction& other) const;
  SampledFunction operator*(const SampledFunction& other) const;  // pointwise
  SampledFunction operator*(Complex scalar) const;

 private:
  void check_compatible(const SampledFunction& other) const;

  FiniteSpace space_;
  std::vector<Complex> values_;
};

double sup_norm(const SampledFunction& f);
Complex integrate(const SampledFunction& f, const WeightedMeasure& mu);

struct NormReport {
  double sup_norm = 0.0;
  double l1_norm = 0.0;  // integral of |f| against the measure
};

NormReport norms(const SampledFunction& f, const WeightedMeasure& mu);

SampledFunction pullback(const FiberedMap& map, const SampledFunction& f);

// Values copied in fiber order onto a fresh space made of the fiber points.
SampledFunction restrict_to_fiber(const SampledFunction& f,
                                  const std::vector<PointId>& fiber);

// Base algebra on the target space, materialized as the span of all monomials
// in the generators (and their conjugates) of degree 1..closure_degree.
class BaseAlgebra {
 public:
  BaseAlgebra() = default;
  BaseAlgebra(FiniteSpace space, std::vector<SampledFunction> generators,
              int closure_degree);

  const FiniteSpace& space() const { return space_; }
  const std::vector<SampledFunction>& generators() const { return generators_; }
  int closure_degree() const { return closure_degree_; }

  // All monomials in the (conjugation-augmented) generators, degree ascending,
  // lexicographic in generator index within a degree.
  std::vector<SampledFunction> monomials() const;

  // Orthonormal basis of the monomial span (counting inner product).
  const std::vector<SampledFunction>& basis() const { return basis_; }

  // Chebyshev distance from each coordinate indicator to the span; the
  // density preflight requires max residual <= 1e-8 (computed elsewhere to
  // avoid a dependency cycle with the LP solver).
  bool generators_vanish_at_infinity() const;

 private:
  FiniteSpace space_;
  std::vector<SampledFunction> generators_;       // as given
  std::vector<SampledFunction> work_generators_;  // augmented with conjugates
  int closure_degree_ = 1;
  std::vector<SampledFunction> basis_;
};

// p*A-module materialized to a finite orthonormal basis: span of
// (pullback of algebra monomial, degree 0..closure_degree) x module generator,
// with module generators augmented by their conjugates.
class PullbackModule {
 public:
  PullbackModule() = default;
  PullbackModule(FiberedSystem system, BaseAlgebra algebra,
                 std::vector<SampledFunction> module_generators,
                 int closure_degree);

  const FiberedSystem& system() const { return system_; }
  const BaseAlgebra& algebra() const { return algebra_; }
  const std::vector<SampledFunction>& module_generators() const {
    return module_generators_;
  }
  int closure_degree() const { return closure_degree_; }
  const std::vector<SampledFunction>& basis() const { return basis_; }
  bool degenerate() const { return basis_.empty(); }

  // Orthonormal basis of the real-valued part of the span (the span of
  // re/im parts, valid because the span is conjugation-stable).
  const std::vector<SampledFunction>& real_basis() const { return real_basis_; }

  const FiniteSpace& source_space() const { return system_.map().source(); }

 private:
  FiberedSystem system_;
  BaseAlgebra algebra_;
  std::vector<SampledFunction> module_generators_;
  int closure_degree_ = 1;
  std::vector<SampledFunction> basis_;
  std::vector<SampledFunction> real_basis_;
};

// Deterministic modified Gram-Schmidt over the given column order; columns
// whose residual norm falls below 1e-10 times the largest input column norm
// are dropped.
std::vector<SampledFunction> orthonormalize(
    const std::vector<SampledFunction>& columns);

std::vector<SampledFunction> materialize_basis(const PullbackModule& module);

// Projection of f onto the span of an orthonormal family; returns the
// residual sup norm via the out parameter when given.
SampledFunction project_onto_span(const SampledFunction& f,
                                  const std::vector<SampledFunction>& onb,
                                  double* residual_sup = nullptr);

// True iff the conjugate of every basis element lies in the span within a
// 1e-9 residual.
bool conjugate_closure_check(const PullbackModule& module);

}  // namespace fibenv
