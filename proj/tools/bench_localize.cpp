#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "fibenv/localization.hpp"
#include "fibenv/rng.hpp"
#include "fibenv/scenario.hpp"

// Compares the serial reference and the parallel fiber-solve path on a batch
// of seeded systems, checking that both agree to machine precision.

int main(int argc, char** argv) {
  const int count = argc > 1 ? std::atoi(argv[1]) : 40;
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 7;

  fibenv::Rng rng(seed);
  fibenv::RandomSystemSpec spec;
  spec.max_targets = 8;
  spec.max_fiber = 4;
  spec.generator_count = 2;

  std::vector<fibenv::PullbackModule> modules;
  std::vector<fibenv::SampledFunction> fns;
  for (int i = 0; i < count; ++i) {
    fibenv::Rng r = rng.split(i);
    modules.push_back(fibenv::random_module(r, spec));
    fns.push_back(fibenv::random_function(r, modules.back().source_space()));
  }

  using clock = std::chrono::steady_clock;
  double worst_gap = 0.0;

  auto t0 = clock::now();
  std::vector<double> serial(count);
  for (int i = 0; i < count; ++i) {
    serial[i] = fibenv::localize_distance(fns[i], modules[i],
                                          fibenv::ExecutionMode::Serial)
                    .sup_fiber_distance;
  }
  auto t1 = clock::now();
  std::vector<double> parallel(count);
  for (int i = 0; i < count; ++i) {
    parallel[i] = fibenv::localize_distance(fns[i], modules[i],
                                            fibenv::ExecutionMode::Parallel)
                      .sup_fiber_distance;
  }
  auto t2 = clock::now();

  for (int i = 0; i < count; ++i) {
    double gap = std::abs(serial[i] - parallel[i]);
    if (gap > worst_gap) worst_gap = gap;
  }

  const double serial_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  const double parallel_ms =
      std::chrono::duration<double, std::milli>(t2 - t1).count();
  std::printf("instances: %d\n", count);
  std::printf("serial:    %.2f ms\n", serial_ms);
  std::printf("parallel:  %.2f ms\n", parallel_ms);
  std::printf("speedup:   %.2fx\n", serial_ms / (parallel_ms > 0 ? parallel_ms : 1));
  std::printf("max |serial - parallel| distance gap: %.3e\n", worst_gap);
  return worst_gap <= 1e-12 ? 0 : 1;
}
