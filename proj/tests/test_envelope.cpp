#include <doctest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "fibenv/envelope.hpp"
#include "fibenv/errors.hpp"
#include "fibenv/obstruction.hpp"
#include "fibenv/rng.hpp"
#include "fibenv/scenario.hpp"

using namespace fibenv;

namespace {

// X = {a,b,c,d} over Y = {y1,y2}, indicator algebra, constants as module.
struct FourPointFixture {
  FiniteSpace X{{"a", "b", "c", "d"}};
  FiniteSpace Y{{"y1", "y2"}};
  FiberedMap p{X, Y, {{"a", "y1"}, {"b", "y1"}, {"c", "y2"}, {"d", "y2"}}};
  FiberedSystem sys{p, WeightedMeasure(X, {{"a", 1.0}, {"b", 1.0}, {"c", 1.0},
                                           {"d", 1.0}})};
  BaseAlgebra A{Y,
                {SampledFunction::indicator(Y, "y1"),
                 SampledFunction::indicator(Y, "y2")},
                2};
  PullbackModule mod{sys, A, {SampledFunction::constant(X, 1.0)}, 2};
  // Fiberwise-dense variant: the second generator separates points inside
  // each fiber, which the pipeline's condition (2) requires.
  PullbackModule dense{sys,
                       A,
                       {SampledFunction::constant(X, 1.0),
                        SampledFunction(X, {Complex(0.0), Complex(1.0),
                                            Complex(0.0), Complex(2.0)})},
                       2};
};

}  // namespace

TEST_CASE("membership: zero is in every neighborhood") {
  FourPointFixture fx;
  FeasibilityCertificate cert = membership_U_eps(
      SampledFunction::zero(fx.X), fx.mod, fx.sys.measure_upstairs(), 1e-3);
  CHECK(cert.feasible);
}

TEST_CASE("membership depends on the available dominator mass") {
  // In the two-atom fixture every fiber-constant dominator of |1_{pi1}| has
  // mass at least d1 + d2 = 2, so h = 1_{pi1} fails at eps = 0.5.
  ObstructionFixture fx = build_fixture(1.0, 1.0, 0);
  SampledFunction h =
      SampledFunction::indicator(fx.system.map().source(), fx.pi1);
  const auto& mu = fx.system.measure_upstairs();
  FeasibilityCertificate tight = membership_U_eps(h, fx.pullback_module, mu, 0.5);
  CHECK(!tight.feasible);
  FeasibilityCertificate loose = membership_U_eps(h, fx.pullback_module, mu, 2.5);
  CHECK(loose.feasible);
}

TEST_CASE("membership witness survives doubling eps") {
  FourPointFixture fx;
  Rng rng(41);
  const auto& mu = fx.sys.measure_upstairs();
  for (int trial = 0; trial < 10; ++trial) {
    Rng r = rng.split(trial);
    SampledFunction h = random_function(r, fx.X);
    for (double eps : {0.5, 1.0, 2.0}) {
      if (membership_U_eps(h, fx.mod, mu, eps).feasible) {
        CHECK(membership_U_eps(h, fx.mod, mu, 2.0 * eps).feasible);
      }
    }
  }
}

TEST_CASE("closure: module elements are feasible at every rung") {
  FourPointFixture fx;
  SampledFunction h = pullback(fx.p, SampledFunction(fx.Y, {Complex(2.0),
                                                            Complex(-1.0)}));
  ClosureReport rep = closure_membership(h, fx.mod, fx.sys.measure_upstairs(),
                                         {1.0, 0.1, 0.01, 1e-4});
  CHECK(rep.in_closure_at_min_rung);
  for (const auto& rung : rep.rungs) CHECK(rung.feasible);
  CHECK(rep.min_feasible_mass <= 1e-7);
}

TEST_CASE("closure: a spike fails exactly below its LP threshold") {
  // h = 1 + spike at 'a'. The module holds fiber constants, so dominating the
  // residual spike (1 at a, 0 elsewhere on the fiber {a,b}) costs mass 2 at
  // best (value 1/2 on the fiber does not dominate: need >= 1 at a).
  FourPointFixture fx;
  SampledFunction h(fx.X, {Complex(2.0), Complex(1.0), Complex(1.0),
                           Complex(1.0)});
  const auto& mu = fx.sys.measure_upstairs();
  ClosureReport rep = closure_membership(h, fx.mod, mu, {3.0, 1.5, 0.5});
  CHECK(rep.rungs[0].feasible);
  double threshold = rep.min_feasible_mass;
  CHECK(threshold > 0.0);
  ClosureReport above =
      closure_membership(h, fx.mod, mu, {threshold * 1.01});
  CHECK(above.rungs[0].feasible);
  ClosureReport below =
      closure_membership(h, fx.mod, mu, {threshold * 0.99});
  CHECK(!below.rungs[0].feasible);
}

TEST_CASE("closure: counterexample ladder fails below (d1+d2)/2") {
  ObstructionFixture fx = build_fixture(1.0, 1.0, 0);
  SampledFunction h =
      SampledFunction::indicator(fx.system.map().source(), fx.pi1);
  ClosureReport rep = closure_membership(h, fx.pullback_module,
                                         fx.system.measure_upstairs(),
                                         {2.0, 1.0, 0.5, 0.1});
  // (d1+d2)/2 = 1: rung 2.0 feasible, 1.0 and below infeasible (mass >= 1
  // cannot be < 1).
  CHECK(rep.rungs[0].feasible);
  CHECK(!rep.rungs[2].feasible);
  CHECK(!rep.rungs[3].feasible);
  CHECK(!rep.in_closure_at_min_rung);
  CHECK(rep.min_feasible_mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("certificates verify by plain arithmetic") {
  FourPointFixture fx;
  SampledFunction h(fx.X, {Complex(2.0), Complex(1.0), Complex(1.0),
                           Complex(1.0)});
  const auto& mu = fx.sys.measure_upstairs();
  ClosureReport rep = closure_membership(h, fx.mod, mu, {3.0});
  REQUIRE(rep.rungs[0].feasible);
  REQUIRE(rep.rungs[0].certificate.has_value());
  std::string why;
  CHECK(verify_certificate(h, *rep.rungs[0].certificate, mu, &why));
}

TEST_CASE("nesting: zero sample is trivially nested") {
  FourPointFixture fx;
  NestingReport rep =
      verify_nesting(fx.mod, fx.sys.measure_upstairs(), {{0.5, 1.0}},
                     {SampledFunction::zero(fx.X)});
  CHECK(rep.ok());
  CHECK(rep.pairs_checked == 1);
}

TEST_CASE("nesting: delta-split pair recombines within budget") {
  FourPointFixture fx;
  Rng rng(42);
  std::vector<SampledFunction> samples;
  for (int i = 0; i < 5; ++i) {
    Rng r = rng.split(i);
    samples.push_back(random_function(r, fx.X) * Complex(0.05));
  }
  NestingReport rep =
      verify_nesting(fx.mod, fx.sys.measure_upstairs(), {{0.5, 1.0}}, samples);
  CHECK(rep.ok());
  CHECK(rep.witnesses_recombined > 0);
}

TEST_CASE("nesting: randomized sweep finds no violations") {
  Rng rng(43);
  RandomSystemSpec spec;
  spec.max_targets = 3;
  spec.max_fiber = 2;
  for (int trial = 0; trial < 10; ++trial) {
    Rng r = rng.split(trial);
    PullbackModule mod = random_module(r, spec);
    const auto& mu = mod.system().measure_upstairs();
    std::vector<SampledFunction> samples;
    for (int i = 0; i < 3; ++i) {
      samples.push_back(random_function(r, mod.source_space()) * Complex(0.1));
    }
    NestingReport rep = verify_nesting(
        mod, mu, {{0.25, 0.5}, {0.5, 1.0}, {0.1, 2.0}}, samples);
    CHECK(rep.ok());
  }
}

TEST_CASE("closure_module_mult: constant cutoff is exact") {
  FourPointFixture fx;
  SampledFunction c = SampledFunction::constant(fx.Y, 1.0);
  SampledFunction m = pullback(fx.p, SampledFunction(fx.Y, {Complex(1.0),
                                                            Complex(-2.0)}));
  EnvelopeCertificate cert =
      closure_module_mult(c, m, fx.mod, fx.sys.measure_upstairs(), 0.1);
  SampledFunction target = pullback(fx.p, c) * m;
  CHECK(sup_norm(target - cert.m1) <= 1e-8);
  CHECK(integrate(cert.m2, fx.sys.measure_upstairs()).real() <= 1e-8);
  std::string why;
  CHECK(verify_certificate(target, cert, fx.sys.measure_upstairs(), &why));
}

TEST_CASE("closure_module_mult: indicator cutoff with a dense algebra") {
  FourPointFixture fx;
  SampledFunction c = SampledFunction::indicator(fx.Y, "y1");
  SampledFunction m = SampledFunction::constant(fx.X, 1.0);
  const auto& mu = fx.sys.measure_upstairs();
  EnvelopeCertificate cert = closure_module_mult(c, m, fx.mod, mu, 0.1);
  SampledFunction target = pullback(fx.p, c) * m;
  std::string why;
  CHECK(verify_certificate(target, cert, mu, &why));
  // Indicators are in the algebra, so the Chebyshev residual is tiny.
  CHECK(integrate(cert.m2, mu).real() <= 1e-6);
}

TEST_CASE("closure_module_mult: constants-only algebra caps the resolution") {
  FiniteSpace X({"a", "b"});
  FiniteSpace Y({"y1", "y2"});
  FiberedMap p(X, Y, {{"a", "y1"}, {"b", "y2"}});
  FiberedSystem sys(p, WeightedMeasure(X, {{"a", 1.0}, {"b", 1.0}}));
  BaseAlgebra constants(Y, {SampledFunction::constant(Y, 1.0)}, 1);
  PullbackModule mod(sys, constants, {SampledFunction::constant(X, 1.0)}, 1);
  SampledFunction c = SampledFunction::indicator(Y, "y1");
  SampledFunction m = SampledFunction::constant(X, 1.0);
  const auto& mu = sys.measure_upstairs();
  // The best constant approximant of an indicator misses by 1/2, so the
  // certificate mass is bounded below: fine resolutions must fail.
  EnvelopeCertificate coarse = closure_module_mult(c, m, mod, mu, 3.0);
  CHECK(integrate(coarse.m2, mu).real() >= 0.5);
  CHECK_THROWS_AS(closure_module_mult(c, m, mod, mu, 0.01), HypothesisError);
}

TEST_CASE("find_dominating: nonnegative module elements dominate themselves") {
  FourPointFixture fx;
  SampledFunction m = pullback(fx.p, SampledFunction(fx.Y, {Complex(1.0),
                                                            Complex(3.0)}));
  SampledFunction n = find_dominating(m, fx.mod);
  const auto& mu = fx.sys.measure_upstairs();
  CHECK(integrate(n, mu).real() == doctest::Approx(integrate(m, mu).real()).epsilon(1e-7));
  for (std::size_t i = 0; i < fx.X.size(); ++i) {
    CHECK(n.at_index(i).real() >= std::abs(m.at_index(i)) - 1e-9);
  }
}

TEST_CASE("find_dominating: sign-alternating function is dominated by 1") {
  FourPointFixture fx;
  SampledFunction m = pullback(fx.p, SampledFunction(fx.Y, {Complex(1.0),
                                                            Complex(-1.0)}));
  SampledFunction n = find_dominating(m, fx.mod);
  for (std::size_t i = 0; i < fx.X.size(); ++i) {
    CHECK(n.at_index(i).real() == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("find_dominating: reports the separating point when impossible") {
  // Module spanned by the indicator of y1's fiber: nothing positive at c, d.
  FourPointFixture fx;
  PullbackModule mod(fx.sys, fx.A,
                     {pullback(fx.p, SampledFunction::indicator(fx.Y, "y1"))},
                     2);
  SampledFunction m = SampledFunction::constant(fx.X, 1.0);
  CHECK_THROWS_AS(find_dominating(m, mod), HypothesisError);
}

TEST_CASE("find_positive_at: constants and indicators") {
  FourPointFixture fx;
  for (const auto& x : fx.X.points()) {
    SampledFunction m = find_positive_at(x, fx.mod);
    CHECK(m.at(x).real() > 0.0);
  }
}

TEST_CASE("find_positive_at: random systems yield positive values") {
  Rng rng(44);
  RandomSystemSpec spec;
  spec.max_targets = 5;
  spec.max_fiber = 2;
  for (int trial = 0; trial < 10; ++trial) {
    Rng r = rng.split(trial);
    PullbackModule mod = random_module(r, spec);
    for (const auto& x : mod.source_space().points()) {
      SampledFunction m = find_positive_at(x, mod);
      CHECK(m.at(x).real() > 0.0);
    }
  }
}

TEST_CASE("find_positive_at: degenerate module is rejected") {
  FourPointFixture fx;
  PullbackModule mod(fx.sys, fx.A,
                     {pullback(fx.p, SampledFunction::indicator(fx.Y, "y1"))},
                     2);
  CHECK_THROWS_AS(find_positive_at("c", mod), HypothesisError);
}

TEST_CASE("bourbaki sandwich with no bad points is the identity") {
  FourPointFixture fx;
  SampledFunction phi(fx.X, {Complex(1.0), Complex(-2.0), Complex(0.5),
                             Complex(0.0)});
  auto desc = RiemannIntegrableDescriptor::make(phi);
  auto [c1, c2] = bourbaki_sandwich(desc, fx.sys.measure_upstairs(), 0.1);
  CHECK(sup_norm(phi - c1) <= 1e-12);
  CHECK(sup_norm(c2) <= 1e-12);
}

TEST_CASE("bourbaki sandwich charges half the oscillation at bad points") {
  FiniteSpace X({"a", "b"});
  WeightedMeasure mu(X, {{"a", 1e-3}, {"b", 1.0}});
  SampledFunction phi(X, {Complex(2.0), Complex(0.0)});
  auto desc = RiemannIntegrableDescriptor::make(phi, {"a"});
  auto [c1, c2] = bourbaki_sandwich(desc, mu, 0.1);
  // |phi - c1| <= c2 pointwise and mu(c2) = weight * osc/2 = 1e-3 * 1.
  for (std::size_t i = 0; i < X.size(); ++i) {
    CHECK(std::abs(phi.at_index(i) - c1.at_index(i)) <=
          c2.at_index(i).real() + 1e-12);
  }
  CHECK(integrate(c2, mu).real() == doctest::Approx(1e-3).epsilon(1e-6));
  CHECK(integrate(c2, mu).real() <= 0.1);
}

TEST_CASE("bourbaki sandwich rejects oscillation mass beyond the budget") {
  FiniteSpace X({"a", "b"});
  WeightedMeasure mu(X, {{"a", 1.0}, {"b", 1.0}});
  SampledFunction phi(X, {Complex(2.0), Complex(0.0)});
  auto desc = RiemannIntegrableDescriptor::make(phi, {"a"});
  CHECK_THROWS_AS(bourbaki_sandwich(desc, mu, 0.1), ResolutionError);
}

TEST_CASE("bad points of zero weight cost nothing") {
  FiniteSpace X({"a", "b"});
  WeightedMeasure mu(X, {{"a", 0.0}, {"b", 1.0}});
  SampledFunction phi(X, {Complex(5.0), Complex(0.0)});
  auto desc = RiemannIntegrableDescriptor::make(phi, {"a"});
  auto [c1, c2] = bourbaki_sandwich(desc, mu, 1e-6);
  CHECK(integrate(c2, mu).real() == 0.0);
}

TEST_CASE("pipeline: module elements get tiny certificate mass") {
  FourPointFixture fx;
  SampledFunction phi = pullback(fx.p, SampledFunction(fx.Y, {Complex(1.0),
                                                              Complex(-0.5)}));
  const auto& mu = fx.sys.measure_upstairs();
  for (double eps : {1.0, 0.1, 0.01}) {
    EnvelopeCertificate cert = main_theorem_pipeline(
        RiemannIntegrableDescriptor::make(phi), fx.dense, mu, eps);
    std::string why;
    CHECK(verify_certificate(phi, cert, mu, &why));
    // The 2*eps1*mc safety term dominates; mass stays well inside the budget.
    CHECK(integrate(cert.m2, mu).real() < 0.5 * eps);
  }
}

TEST_CASE("pipeline: indicator atom certified at every rung with the ledger") {
  Rng rng(45);
  RandomSystemSpec spec;
  spec.max_targets = 3;
  spec.max_fiber = 2;
  spec.separating = true;
  PullbackModule mod = random_module(rng, spec);
  const auto& mu = mod.system().measure_upstairs();
  SampledFunction phi = SampledFunction::indicator(
      mod.source_space(), mod.source_space().point_at(0));
  for (double eps : {1.0, 0.1, 0.01}) {
    EnvelopeCertificate cert = main_theorem_pipeline(
        RiemannIntegrableDescriptor::make(phi), mod, mu, eps);
    std::string why;
    CHECK_MESSAGE(verify_certificate(phi, cert, mu, &why), why);
    REQUIRE(cert.budget.has_value());
    const BudgetLedger& lg = *cert.budget;
    double mc_sup = lg.mc_sup;
    double mc_mass = lg.mc_mass;
    CHECK(lg.eps1 < eps / (3.0 * mc_sup + mc_mass));
    // p*c <= mc pointwise.
    SampledFunction pc = pullback(mod.system().map(), lg.cutoff_c);
    for (std::size_t i = 0; i < pc.space().size(); ++i) {
      CHECK(lg.dominating_mc.at_index(i).real() >=
            pc.at_index(i).real() - 1e-9);
    }
    CHECK(sup_norm(lg.sandwich_c1 - lg.sw_m1) < lg.eps1 + 1e-9);
    CHECK(sup_norm(lg.sandwich_c2 - lg.sw_m2) < lg.eps1 + 1e-9);
  }
}

TEST_CASE("splice: empty bad set reduces to the pipeline") {
  FourPointFixture fx;
  const auto& mu = fx.sys.measure_upstairs();
  SampledFunction phi(fx.X, {Complex(1.0), Complex(0.0), Complex(0.0),
                             Complex(0.0)});
  SampledFunction cutoff = SampledFunction::constant(fx.Y, 1.0);
  EnvelopeCertificate cert = density_theorem_splice(
      RiemannIntegrableDescriptor::make(phi), fx.dense, mu, cutoff,
      SampledFunction::zero(fx.X), 1.0);
  std::string why;
  CHECK(verify_certificate(phi, cert, mu, &why));
}

TEST_CASE("splice: counterexample fixture closes with a supplied majorant") {
  ObstructionFixture fx = build_fixture(0.05, 0.05, 2);
  const auto& mu = fx.system.measure_upstairs();
  SampledFunction phi =
      SampledFunction::indicator(fx.system.map().source(), fx.pi1);
  SampledFunction cutoff =
      SampledFunction::constant(fx.system.map().target(), 1.0);
  // Majorant covering the unresolvable fiber with mass d1 + d2 = 0.1.
  SampledFunction h3 =
      pullback(fx.system.map(),
               SampledFunction::indicator(fx.system.map().target(), fx.y0));
  EnvelopeCertificate cert = density_theorem_splice(
      RiemannIntegrableDescriptor::make(phi, {fx.pi1}), fx.separating_module,
      mu, cutoff, h3, 1.0);
  std::string why;
  CHECK_MESSAGE(verify_certificate(phi, cert, mu, &why), why);
}

TEST_CASE("splice: undersized majorant is rejected with a domination report") {
  ObstructionFixture fx = build_fixture(1.0, 1.0, 0);
  const auto& mu = fx.system.measure_upstairs();
  SampledFunction phi =
      SampledFunction::indicator(fx.system.map().source(), fx.pi1);
  SampledFunction cutoff =
      SampledFunction::constant(fx.system.map().target(), 1.0);
  CHECK_THROWS_AS(
      density_theorem_splice(RiemannIntegrableDescriptor::make(phi, {fx.pi1}),
                             fx.separating_module, mu, cutoff,
                             SampledFunction::zero(fx.system.map().source()),
                             0.5),
      ResolutionError);
}

TEST_CASE("double closure: half-resolution certificates splice to eps") {
  FourPointFixture fx;
  const auto& mu = fx.sys.measure_upstairs();
  Rng rng(46);
  for (int trial = 0; trial < 5; ++trial) {
    Rng r = rng.split(trial);
    std::vector<Complex> vals;
    for (std::size_t i = 0; i < fx.X.size(); ++i) {
      vals.emplace_back(r.uniform(-0.05, 0.05), 0.0);
    }
    SampledFunction phi(fx.X, std::move(vals));
    EnvelopeCertificate cert = splice_double_closure(phi, fx.mod, mu, 1.0);
    CHECK(cert.eps == doctest::Approx(1.0));
    std::string why;
    CHECK_MESSAGE(verify_certificate(phi, cert, mu, &why), why);
  }
}
