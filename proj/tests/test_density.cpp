#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "fibenv/density.hpp"
#include "fibenv/envelope.hpp"
#include "fibenv/errors.hpp"
#include "fibenv/rng.hpp"
#include "fibenv/scenario.hpp"

using namespace fibenv;

namespace {

struct SixPointFixture {
  FiniteSpace X{{"a", "b", "c", "d", "e", "f"}};
  FiniteSpace Y{{"y1", "y2", "y3"}};
  FiberedMap p{X, Y,
               {{"a", "y1"}, {"b", "y1"}, {"c", "y2"}, {"d", "y2"},
                {"e", "y3"}, {"f", "y3"}}};
  FiberedSystem sys{p, WeightedMeasure(X, {{"a", 1.0}, {"b", 0.5}, {"c", 1.0},
                                           {"d", 0.5}, {"e", 1.0}, {"f", 0.5}})};
  BaseAlgebra A{Y,
                {SampledFunction::indicator(Y, "y1"),
                 SampledFunction::indicator(Y, "y2"),
                 SampledFunction::indicator(Y, "y3")},
                2};
  PullbackModule mod{sys,
                     A,
                     {SampledFunction::constant(X, 1.0),
                      SampledFunction(X, {Complex(0.0), Complex(1.0), Complex(0.0),
                                          Complex(1.0), Complex(0.0),
                                          Complex(1.0)})},
                     2};
};

}  // namespace

TEST_CASE("constant sequence has zero deviations everywhere") {
  SixPointFixture fx;
  const auto& mu = fx.sys.measure_upstairs();
  MeasureSequence seq(mu, std::vector<WeightedMeasure>(10, mu));
  ModuleConvergenceReport rep = check_convergence_on_module(seq, fx.mod, 1e-9, 10);
  CHECK(rep.all_convergent);
  for (const auto& dir : rep.directions) {
    CHECK(dir.convergent);
    CHECK(dir.tail_deviation == 0.0);
  }
}

TEST_CASE("perturbation sequence decays like |nu(b)|/n") {
  SixPointFixture fx;
  const auto& mu = fx.sys.measure_upstairs();
  WeightedMeasure nu(fx.X, {{"a", 1.0}, {"b", 0.0}, {"c", 2.0}, {"d", 0.0},
                            {"e", 0.0}, {"f", 0.0}});
  MeasureSequence seq = MeasureSequence::perturbation(mu, nu, 50);
  // Tolerance sized to the tail window [25, 50]: deviations there are
  // |nu(b)|/n <= mass(nu)/25.
  ModuleConvergenceReport rep =
      check_convergence_on_module(seq, fx.mod, 3.0 / 25.0, 50);
  CHECK(rep.all_convergent);
  // Deviation along each direction is exactly |nu(b)|/n.
  for (std::size_t bi = 0; bi < rep.deviations.size(); ++bi) {
    double nu_b = rep.deviations[bi][0];  // n = 1 gives |nu(b)| itself
    for (int n = 1; n <= 50; ++n) {
      CHECK(rep.deviations[bi][n - 1] ==
            doctest::Approx(nu_b / n).epsilon(1e-9));
    }
  }
}

TEST_CASE("oscillation invisible to the module converges on the module only") {
  // nu oscillates between b-atoms inside the y1 fiber; module elements are
  // fiber-constant on the basis directions only when the second generator is
  // dropped, so use the constants-only module.
  SixPointFixture base;
  PullbackModule mod(base.sys, base.A, {SampledFunction::constant(base.X, 1.0)},
                     2);
  const auto& mu = base.sys.measure_upstairs();
  std::vector<WeightedMeasure> terms;
  for (int n = 1; n <= 20; ++n) {
    double s = (n % 2 == 0) ? 0.25 : -0.25;
    terms.push_back(WeightedMeasure(
        base.X, {{"a", 1.0 + s}, {"b", 0.5 - s}, {"c", 1.0}, {"d", 0.5},
                 {"e", 1.0}, {"f", 0.5}}));
  }
  MeasureSequence seq(mu, terms);
  ModuleConvergenceReport on_module = check_convergence_on_module(seq, mod, 1e-6, 20);
  CHECK(on_module.all_convergent);
  // The full module (with an in-fiber separating generator) sees the
  // oscillation and fails to converge.
  ModuleConvergenceReport full =
      check_convergence_on_module(seq, base.mod, 1e-6, 20);
  CHECK(!full.all_convergent);
}

TEST_CASE("transfer with the constant sequence is exact") {
  SixPointFixture fx;
  const auto& mu = fx.sys.measure_upstairs();
  MeasureSequence seq(mu, std::vector<WeightedMeasure>(20, mu));
  SampledFunction phi(fx.X, {Complex(1.0), Complex(0.0), Complex(0.0),
                             Complex(0.0), Complex(0.0), Complex(0.0)});
  auto desc = RiemannIntegrableDescriptor::make(phi);
  EnvelopeCertificate cert = main_theorem_pipeline(desc, fx.mod, mu, 0.1);
  TransferReport rep = transfer_convergence(seq, desc, fx.mod, cert, 0.1, 20);
  CHECK(rep.hypothesis_ok);
  CHECK(rep.conclusion_asserted);
  for (double v : rep.lhs) CHECK(v <= 1e-12);
  CHECK(rep.tail_limsup <= rep.bound);
}

TEST_CASE("transfer on a perturbation sequence meets the 2eps bound") {
  SixPointFixture fx;
  const auto& mu = fx.sys.measure_upstairs();
  // Perturbation small enough that the tail-window module deviations clear
  // the 1e-6 convergence gate at N = 200.
  WeightedMeasure nu(fx.X, {{"a", 5e-6}, {"b", 2e-6}, {"c", 0.0}, {"d", 0.0},
                            {"e", 3e-6}, {"f", 0.0}});
  MeasureSequence seq = MeasureSequence::perturbation(mu, nu, 200);
  SampledFunction phi(fx.X, {Complex(1.0), Complex(0.0), Complex(0.0),
                             Complex(0.0), Complex(0.0), Complex(0.0)});
  auto desc = RiemannIntegrableDescriptor::make(phi);
  for (double eps : {0.5, 0.1}) {
    EnvelopeCertificate cert = main_theorem_pipeline(desc, fx.mod, mu, eps);
    TransferReport rep = transfer_convergence(seq, desc, fx.mod, cert, eps, 200);
    CHECK(rep.hypothesis_ok);
    CHECK(rep.conclusion_asserted);
    CHECK(rep.bound == doctest::Approx(2.0 * eps + 1e-6));
    CHECK(rep.tail_limsup <= rep.bound);
    // Triangle decomposition holds at every n.
    REQUIRE(rep.lhs.size() == rep.rhs.size());
    for (std::size_t i = 0; i < rep.lhs.size(); ++i) {
      CHECK(rep.lhs[i] <= rep.rhs[i] + 1e-12);
    }
  }
}

TEST_CASE("adversarial sequence is rejected at the hypothesis gate") {
  SixPointFixture fx;
  const auto& mu = fx.sys.measure_upstairs();
  // Non-vanishing oscillation visible to the module: mass on the whole y1
  // fiber flips each step.
  std::vector<WeightedMeasure> terms;
  for (int n = 1; n <= 40; ++n) {
    double s = (n % 2 == 0) ? 0.5 : 0.0;
    terms.push_back(WeightedMeasure(
        fx.X, {{"a", 1.0 + s}, {"b", 0.5 + s}, {"c", 1.0}, {"d", 0.5},
               {"e", 1.0}, {"f", 0.5}}));
  }
  MeasureSequence seq(mu, terms);
  SampledFunction phi(fx.X, {Complex(1.0), Complex(0.0), Complex(0.0),
                             Complex(0.0), Complex(0.0), Complex(0.0)});
  auto desc = RiemannIntegrableDescriptor::make(phi);
  EnvelopeCertificate cert = main_theorem_pipeline(desc, fx.mod, mu, 0.5);
  TransferReport rep = transfer_convergence(seq, desc, fx.mod, cert, 0.5, 40);
  CHECK(!rep.hypothesis_ok);
  CHECK(!rep.conclusion_asserted);
  CHECK(!rep.detail.empty());
}

TEST_CASE("well-formed bad-set fixtures pass all checks") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    for (int n_dim : {1, 2}) {
      BadSetEstimateFixture fx = make_badset_fixture(seed, n_dim, "");
      BadSetReport rep = verify_bad_set_estimates(fx);
      bool all = true;
      for (const auto& c : rep.checks) all = all && c.pass;
      CHECK(all);
      CHECK(rep.all_pass);
      CHECK(rep.h_prime_mass < fx.eps_total / 2.0);
    }
  }
}

TEST_CASE("the checker reports the full set of named checks") {
  BadSetEstimateFixture fx = make_badset_fixture(7, 2, "");
  BadSetReport rep = verify_bad_set_estimates(fx);
  std::vector<std::string> expected = {
      "band-constraints",     "good-covered",
      "bad-covered",          "annulus",
      "elsewhere",            "h-prime-nonnegative-on-C1",
      "h-prime-at-least-1-on-bad-C1", "h-prime-mass"};
  REQUIRE(rep.checks.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(rep.checks[i].name == expected[i]);
  }
}

TEST_CASE("violated fixtures fail exactly the named check") {
  for (const std::string& violate :
       {std::string("band-constraints"), std::string("good-covered"),
        std::string("h-prime-nonnegative-on-C1"),
        std::string("h-prime-at-least-1-on-bad-C1"),
        std::string("h-prime-mass")}) {
    BadSetEstimateFixture fx = make_badset_fixture(11, 2, violate);
    BadSetReport rep = verify_bad_set_estimates(fx);
    CHECK(!rep.all_pass);
    bool named_failed = false;
    for (const auto& c : rep.checks) {
      if (c.name == violate && !c.pass) {
        named_failed = true;
        // The mass check is global and carries no worst point.
        if (violate != "h-prime-mass") CHECK(!c.worst_point.empty());
      }
    }
    CHECK_MESSAGE(named_failed, violate);
  }
}

TEST_CASE("unknown violation labels are rejected") {
  CHECK_THROWS_AS(make_badset_fixture(1, 1, "no-such-check"), ArgumentError);
}

TEST_CASE("the checker never adjusts its inputs") {
  BadSetEstimateFixture fx = make_badset_fixture(13, 1, "");
  SampledFunction before = fx.hat_h2;
  double eps_before = fx.eps_total;
  (void)verify_bad_set_estimates(fx);
  CHECK(sup_norm(fx.hat_h2 - before) == 0.0);
  CHECK(fx.eps_total == eps_before);
}
