#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fibenv {

// Exact rational coordinates; arbitrary precision so deep dyadic levels never
// overflow a machine word.
using Rat = boost::multiprecision::cpp_rational;

// R^n modulo Z^m: the first m coordinates are circular with period 1.
struct TorusQuotient {
  int n = 1;  // ambient dimension
  int m = 0;  // rank of the lattice, m <= n

  bool circular(int axis) const { return axis < m; }
};

// Axis-aligned open box with uniform width; centers on circular axes are
// reduced mod 1. Widths stay exact rationals throughout.
struct Box {
  std::vector<Rat> center;
  Rat width{0};
};

TorusQuotient make_torus(int n, int m);
Box make_box(const TorusQuotient& space, std::vector<Rat> center, Rat width);

// Compact region: a finite union of closed boxes, or a point cloud fattened
// by a closed epsilon-neighborhood (the K_eps device; eps may be 0).
struct CompactRegion {
  std::vector<Box> boxes;               // treated as closed
  std::vector<std::vector<Rat>> points;
  Rat fattening{0};

  bool empty() const { return boxes.empty() && points.empty(); }
};

// Open neighborhoods U_x of width radius(x) around points x of K. Either a
// constant-radius rule (U_x exists for every point of K) or an explicit
// finite list of sites.
struct NeighborhoodFamily {
  struct Site {
    std::vector<Rat> center;
    Rat radius{0};
  };
  std::optional<Rat> constant_radius;  // rule: every K point carries this radius
  std::vector<Site> sites;

  Rat r_min() const;
};

struct CoverResult {
  std::vector<Box> boxes;  // thickened, open
  int k_final = 0;
  // Per box: the witness x with closure(W_i) inside U_x.
  std::vector<std::vector<Rat>> subordination;
  int multiplicity = 0;
  std::vector<Rat> multiplicity_witness;
};

// All thickened-family centers at dyadic level k are (j + 1/2)/2^k; this
// enumerates the unthickened grid boxes whose closure meets the window
// [window_lo, window_hi] per axis (full period on circular axes).
std::vector<Box> dyadic_boxes(const TorusQuotient& space, int k,
                              const std::vector<Rat>& window_lo,
                              const std::vector<Rat>& window_hi);

// Width scaled by exactly 11/10; errors out when the result would wrap a
// circular axis.
Box thicken(const TorusQuotient& space, const Box& box);

// Thickened level-k boxes whose closure meets K (exact interval arithmetic,
// wrap-aware).
std::vector<Box> select_meeting(const TorusQuotient& space, const CompactRegion& K,
                                int k);

CoverResult build_cover(const TorusQuotient& space, const CompactRegion& K,
                        const NeighborhoodFamily& family);

// Maximum over points of the number of closed boxes containing the point,
// exact, with an attaining point.
std::pair<int, std::vector<Rat>> exact_multiplicity(const TorusQuotient& space,
                                                    const std::vector<Box>& boxes);

// Closed-box membership / containment predicates used by the tests.
bool closed_box_contains_point(const TorusQuotient& space, const Box& box,
                               const std::vector<Rat>& p);
bool open_box_contains_point(const TorusQuotient& space, const Box& box,
                             const std::vector<Rat>& p);
bool closed_box_inside_open_box(const TorusQuotient& space, const Box& inner,
                                const Box& outer);
bool closed_boxes_intersect(const TorusQuotient& space, const Box& a, const Box& b);

std::string rat_to_string(const Rat& r);

}  // namespace fibenv
