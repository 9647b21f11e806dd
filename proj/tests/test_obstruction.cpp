#include <doctest.h>

#include <cmath>
#include <string>

#include "fibenv/errors.hpp"
#include "fibenv/obstruction.hpp"
#include "fibenv/rng.hpp"

using namespace fibenv;

TEST_CASE("minimal fixture: two-point source over a one-point target") {
  ObstructionFixture fx = build_fixture(1.0, 1.0, 0);
  CHECK(fx.system.map().source().size() == 2);
  CHECK(fx.system.map().target().size() == 1);
  CHECK(fx.system.measure_upstairs().weight(fx.pi1) == doctest::Approx(1.0));
  CHECK(fx.system.measure_upstairs().weight(fx.pi2) == doctest::Approx(1.0));
}

TEST_CASE("fixture with extra singleton fibers") {
  ObstructionFixture fx = build_fixture(1.0, 2.0, 3);
  CHECK(fx.system.map().source().size() == 5);
  CHECK(fx.system.map().target().size() == 4);
  // The designated fiber holds exactly pi1 and pi2.
  auto fibers = fibers_of(fx.system.map());
  CHECK(fibers.at(fx.y0).size() == 2);
  CHECK(fx.d1 == 1.0);
  CHECK(fx.d2 == 2.0);
}

TEST_CASE("the separating module separates the two atoms") {
  ObstructionFixture fx = build_fixture(1.0, 1.0, 1);
  bool separated = false;
  for (const auto& g : fx.separating_module.module_generators()) {
    if (std::abs(g.at(fx.pi1) - g.at(fx.pi2)) > 1e-12) separated = true;
  }
  CHECK(separated);
  // The pullback-only module cannot: every basis element is fiber-constant.
  for (const auto& b : fx.pullback_module.basis()) {
    CHECK(std::abs(b.at(fx.pi1) - b.at(fx.pi2)) <= 1e-9);
  }
}

TEST_CASE("nonpositive masses are rejected") {
  CHECK_THROWS_AS(build_fixture(0.0, 1.0, 0), ArgumentError);
  CHECK_THROWS_AS(build_fixture(1.0, -2.0, 0), ArgumentError);
}

TEST_CASE("pullback threshold sits at (d1+d2)/2") {
  ObstructionFixture fx = build_fixture(1.0, 1.0, 0);
  ThresholdResult res = infeasibility_threshold(fx, ModuleChoice::PullbackOnly);
  CHECK(std::abs(res.threshold - 1.0) <= 1e-3);
  CHECK(res.lp_exact == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.analytic_bound == doctest::Approx(0.5));
  CHECK(res.bisection_steps > 0);
}

TEST_CASE("asymmetric masses: threshold 1.25 for d1=2, d2=0.5") {
  ObstructionFixture fx = build_fixture(2.0, 0.5, 0);
  ThresholdResult res = infeasibility_threshold(fx, ModuleChoice::PullbackOnly);
  CHECK(std::abs(res.threshold - 1.25) <= 1e-3);
  CHECK(res.lp_exact == doctest::Approx(1.25).epsilon(1e-6));
  CHECK(res.analytic_bound == doctest::Approx(1.0));
}

TEST_CASE("separating module has threshold at the bisection floor") {
  ObstructionFixture fx = build_fixture(1.0, 1.0, 0);
  ThresholdResult res = infeasibility_threshold(fx, ModuleChoice::Separating);
  CHECK(res.threshold <= 1e-4);
}

TEST_CASE("threshold matches (d1+d2)/2 across random mass pairs") {
  Rng rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    double d1 = rng.uniform(0.2, 3.0);
    double d2 = rng.uniform(0.2, 3.0);
    ObstructionFixture fx = build_fixture(d1, d2, (int)rng.below(3));
    ThresholdResult res = infeasibility_threshold(fx, ModuleChoice::PullbackOnly);
    CHECK(std::abs(res.threshold - 0.5 * (d1 + d2)) <= 1e-3);
    CHECK(res.threshold >= 0.5 * d1 - 1e-3);  // the coarser analytic bound
    ThresholdResult sep = infeasibility_threshold(fx, ModuleChoice::Separating);
    CHECK(sep.threshold <= 1e-4);
  }
}

TEST_CASE("contradiction replay below the threshold") {
  ObstructionFixture fx = build_fixture(1.0, 1.0, 0);
  ContradictionTrace trace = contradiction_replay(fx, 0.4);
  CHECK(trace.contradiction);
  CHECK(trace.eps == 0.4);
  CHECK(trace.analytic_bound == doctest::Approx(0.5));
  CHECK(trace.lp_exact == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(!trace.steps.empty());
  for (const auto& step : trace.steps) CHECK(step.holds);
  std::string why;
  CHECK_MESSAGE(verify_trace(trace, &why), why);
}

TEST_CASE("no contradiction above the threshold, witness attached") {
  ObstructionFixture fx = build_fixture(1.0, 1.0, 0);
  ContradictionTrace trace = contradiction_replay(fx, 1.5);
  CHECK(!trace.contradiction);
  REQUIRE(trace.witness.has_value());
  // The witness is a genuine certificate for the indicator of pi1.
  SampledFunction phi =
      SampledFunction::indicator(fx.system.map().source(), fx.pi1);
  std::string why;
  CHECK_MESSAGE(
      verify_certificate(phi, *trace.witness, fx.system.measure_upstairs(), &why),
      why);
  std::string text = trace_to_text(trace);
  CHECK(text.find("no contradiction") != std::string::npos);
}

TEST_CASE("the g-independent lower bound appears in the trace") {
  // |1 - g| + |g| >= 1 forces h(y0) >= 1/2 regardless of g; the trace must
  // carry that step with lhs >= 1/2.
  ObstructionFixture fx = build_fixture(2.0, 0.5, 1);
  ContradictionTrace trace = contradiction_replay(fx, 0.3);
  CHECK(trace.contradiction);
  bool found_half = false;
  for (const auto& step : trace.steps) {
    if (step.relation == ">=" && step.rhs == doctest::Approx(0.5)) {
      found_half = true;
    }
  }
  CHECK(found_half);
  std::string why;
  CHECK(verify_trace(trace, &why));
}

TEST_CASE("verify_trace rejects a doctored step") {
  ObstructionFixture fx = build_fixture(1.0, 1.0, 0);
  ContradictionTrace trace = contradiction_replay(fx, 0.4);
  REQUIRE(!trace.steps.empty());
  trace.steps[0].lhs += 10.0;
  trace.steps[0].relation = "<=";
  trace.steps[0].rhs = trace.steps[0].lhs - 5.0;
  std::string why;
  CHECK(!verify_trace(trace, &why));
  CHECK(!why.empty());
}

TEST_CASE("trace renders to readable text") {
  ObstructionFixture fx = build_fixture(1.0, 1.0, 0);
  ContradictionTrace trace = contradiction_replay(fx, 0.4);
  std::string text = trace_to_text(trace);
  CHECK(text.find("contradiction") != std::string::npos);
  CHECK(text.find("analytic bound") != std::string::npos);
  // One line per step.
  std::size_t lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  CHECK(lines >= trace.steps.size());
}

TEST_CASE("replay is deterministic") {
  ObstructionFixture fx = build_fixture(1.3, 0.7, 2);
  ContradictionTrace a = contradiction_replay(fx, 0.35);
  ContradictionTrace b = contradiction_replay(fx, 0.35);
  CHECK(trace_to_text(a) == trace_to_text(b));
}
