#pragma once

#include <optional>
#include <vector>

namespace fibenv {

struct AvoidanceInstance {
  int dimension = 0;
  std::vector<std::vector<double>> S;       // spanning vectors
  std::vector<std::vector<double>> T_dual;  // covectors to avoid
};

struct AvoidanceResult {
  std::vector<double> v;
  long long t = 0;  // the power base used in v = sum t^i s_i
};

// Deterministic hyperplane avoidance: v = sum_i t^i s_i for the smallest
// positive integer t making every covector nonzero on v. Each lambda(v(t)) is
// a nonzero polynomial of degree < |S| in t, so at most |S|*|T_dual| values of
// t can fail. Uses exact integer evaluation when all inputs are integral.
AvoidanceResult find_regular_vector(const AvoidanceInstance& inst);

// Grid scan over small rational combinations of S (|S| <= 3); returns any
// combination on which every covector is nonzero with the standard margin.
std::optional<std::vector<double>> brute_force_avoidance_oracle(
    const AvoidanceInstance& inst, int grid);

// |lambda(v)| > 1e-12 * ||lambda|| * ||v|| for every lambda.
bool margin_check(const AvoidanceInstance& inst, const std::vector<double>& v);

}  // namespace fibenv
