#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "fibenv/box_cover.hpp"
#include "fibenv/density.hpp"
#include "fibenv/json_io.hpp"
#include "fibenv/regular_vector.hpp"
#include "fibenv/rng.hpp"

namespace fibenv {

// ---- seeded fixture generators (shared by scenarios and the test suites) ----

struct RandomSystemSpec {
  int max_targets = 4;        // |Y|
  int max_fiber = 3;          // points per fiber
  int generator_count = 2;    // module generators
  bool separating = false;    // generators take distinct values within fibers
};

// Random fibered system with indicator base algebra (dense in C(Y)) and real
// module generators, so the localization preflight passes by construction.
PullbackModule random_module(Rng& rng, const RandomSystemSpec& spec);

SampledFunction random_function(Rng& rng, const FiniteSpace& space,
                                bool real_valued = false);

// Passing bad-set fixture assembled from an actual box cover on [0,1]^n_dim
// (so c'_G is the 2^n multiplicity bound). `violate` picks a check to break:
// "", "band-constraints", "good-covered", "h-prime-nonnegative-on-C1",
// "h-prime-at-least-1-on-bad-C1", "h-prime-mass".
BadSetEstimateFixture make_badset_fixture(std::uint64_t seed, int n_dim,
                                          const std::string& violate = "");

// Random compact region plus a constant-radius neighborhood family.
std::pair<CompactRegion, NeighborhoodFamily> random_region(Rng& rng,
                                                           const TorusQuotient& space);

AvoidanceInstance random_avoidance_instance(Rng& rng, int max_dim);

// ---- scenario runner ----

struct ScenarioOutcome {
  int exit_code = 0;  // 0 pass, 2 assertion failure
  Json report;
  std::map<std::string, std::string> extra_files;  // filename -> content
};

// Executes one scenario config; throws ConfigError on malformed input.
ScenarioOutcome run_scenario(const Json& config);

// File-level wrappers used by the CLI: load, execute, write reports into
// out_dir. Returns the process exit code (0 pass, 1 config error, 2 failure).
int run_config(const std::string& config_path, const std::string& out_dir);
int run_suite(const std::string& dir, const std::string& out_dir);

}  // namespace fibenv
