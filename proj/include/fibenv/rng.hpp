#pragma once

#include <cstdint>
#include <random>

namespace fibenv {

// Deterministic random stream. All distributions are implemented directly on
// top of the raw 64-bit output so report bytes do not depend on the standard
// library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection-free modulo is fine at the scales used here; the bias is
    // far below anything a test can observe, and it keeps streams stable.
    return next_u64() % n;
  }

  int range(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // Derive an independent stream for a named sub-task.
  Rng split(std::uint64_t stream_id) const {
    std::mt19937_64 probe(engine_);
    return Rng(probe() ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1)));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fibenv
