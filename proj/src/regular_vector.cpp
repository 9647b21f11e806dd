#include "fibenv/regular_vector.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "fibenv/errors.hpp"

namespace fibenv {

namespace {

void validate(const AvoidanceInstance& inst) {
  if (inst.dimension <= 0) throw ArgumentError("dimension must be positive");
  if (inst.S.empty()) throw ArgumentError("S must be nonempty");
  for (const auto& s : inst.S) {
    if ((int)s.size() != inst.dimension) {
      throw ArgumentError("vector in S has the wrong dimension");
    }
  }
  for (const auto& l : inst.T_dual) {
    if ((int)l.size() != inst.dimension) {
      throw ArgumentError("covector in T_dual has the wrong dimension");
    }
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

bool all_integral(const AvoidanceInstance& inst) {
  auto is_int = [](double x) {
    return std::abs(x - std::round(x)) < 1e-12 && std::abs(x) < 1e6;
  };
  for (const auto& s : inst.S) {
    for (double x : s) {
      if (!is_int(x)) return false;
    }
  }
  for (const auto& l : inst.T_dual) {
    for (double x : l) {
      if (!is_int(x)) return false;
    }
  }
  return true;
}

}  // namespace

bool margin_check(const AvoidanceInstance& inst, const std::vector<double>& v) {
  double nv = norm2(v);
  if (nv == 0.0) return inst.T_dual.empty();
  for (const auto& l : inst.T_dual) {
    if (std::abs(dot(l, v)) <= 1e-12 * norm2(l) * nv) return false;
  }
  return true;
}

AvoidanceResult find_regular_vector(const AvoidanceInstance& inst) {
  validate(inst);
  // Precondition: no covector annihilates every element of S.
  for (std::size_t j = 0; j < inst.T_dual.size(); ++j) {
    bool kills_all = true;
    for (const auto& s : inst.S) {
      if (std::abs(dot(inst.T_dual[j], s)) > 1e-12 * norm2(inst.T_dual[j]) * norm2(s)) {
        kills_all = false;
        break;
      }
    }
    if (kills_all) {
      throw HypothesisError("covector " + std::to_string(j) +
                            " vanishes on all of S");
    }
  }

  const bool exact = all_integral(inst);
  const long long t_max =
      (long long)inst.S.size() * (long long)std::max<std::size_t>(1, inst.T_dual.size()) + 1;
  for (long long t = 1; t <= t_max; ++t) {
    std::vector<double> v(inst.dimension, 0.0);
    double power = 1.0;
    for (const auto& s : inst.S) {
      power *= (double)t;
      for (int k = 0; k < inst.dimension; ++k) v[k] += power * s[k];
    }
    bool ok = true;
    if (exact) {
      // lambda(v(t)) = sum_i t^i lambda(s_i) with integer terms: exact sign.
      for (const auto& l : inst.T_dual) {
        __int128 acc = 0;
        __int128 p = 1;
        for (const auto& s : inst.S) {
          p *= t;
          long long ls = 0;
          for (int k = 0; k < inst.dimension; ++k) {
            ls += (long long)std::llround(l[k]) * (long long)std::llround(s[k]);
          }
          acc += p * (__int128)ls;
        }
        if (acc == 0) {
          ok = false;
          break;
        }
      }
      ok = ok && margin_check(inst, v);
    } else {
      ok = margin_check(inst, v);
    }
    if (ok) return AvoidanceResult{std::move(v), t};
  }
  throw ResolutionError("no regular t found below the combinatorial bound");
}

std::optional<std::vector<double>> brute_force_avoidance_oracle(
    const AvoidanceInstance& inst, int grid) {
  validate(inst);
  if (inst.S.size() > 3) throw ArgumentError("oracle handles |S| <= 3 only");
  if (grid < 1) throw ArgumentError("grid must be >= 1");
  const int n = (int)inst.S.size();
  std::vector<int> c(n, -grid);
  while (true) {
    bool all_zero = true;
    for (int i = 0; i < n; ++i) all_zero = all_zero && c[i] == 0;
    if (!all_zero) {
      std::vector<double> v(inst.dimension, 0.0);
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < inst.dimension; ++k) v[k] += c[i] * inst.S[i][k];
      }
      if (margin_check(inst, v)) return v;
    }
    int axis = 0;
    while (axis < n && c[axis] == grid) {
      c[axis] = -grid;
      ++axis;
    }
    if (axis == n) break;
    ++c[axis];
  }
  return std::nullopt;
}

}  // namespace fibenv
