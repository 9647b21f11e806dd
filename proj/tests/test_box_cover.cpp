#include <doctest.h>

#include <vector>

#include "fibenv/box_cover.hpp"
#include "fibenv/errors.hpp"
#include "fibenv/rng.hpp"
#include "fibenv/scenario.hpp"

using namespace fibenv;

namespace {

Rat rat(long p, long q) { return Rat(p) / Rat(q); }

}  // namespace

TEST_CASE("dyadic level 1 covers the circle with two boxes") {
  TorusQuotient space = make_torus(1, 1);
  std::vector<Box> boxes = dyadic_boxes(space, 1, {Rat(0)}, {Rat(1)});
  CHECK(boxes.size() == 2);
  for (const auto& b : boxes) CHECK(b.width == rat(1, 2));
}

TEST_CASE("dyadic level 2 on the unit square gives a 4x4 grid") {
  TorusQuotient space = make_torus(2, 0);
  // Window strictly inside [0,1]^2 so boundary-touching outside neighbors
  // are excluded and exactly the 4x4 interior grid remains.
  std::vector<Box> boxes =
      dyadic_boxes(space, 2, {rat(1, 8), rat(1, 8)}, {rat(7, 8), rat(7, 8)});
  CHECK(boxes.size() == 16);
  for (const auto& b : boxes) {
    CHECK(b.width == rat(1, 4));
    for (const auto& c : b.center) {
      // Centers sit on the shifted lattice (j + 1/2)/4.
      Rat scaled = c * 4 - rat(1, 2);
      CHECK(boost::multiprecision::denominator(scaled) == 1);
    }
  }
}

TEST_CASE("adjacent unthickened grid boxes share only boundary") {
  TorusQuotient space = make_torus(1, 0);
  std::vector<Box> boxes = dyadic_boxes(space, 2, {Rat(0)}, {Rat(1)});
  REQUIRE(boxes.size() >= 2);
  // Open boxes of the grid are disjoint: the shared coordinate 1/4 belongs to
  // neither open box but to both closures.
  Box left = make_box(space, {rat(1, 8)}, rat(1, 4));
  Box right = make_box(space, {rat(3, 8)}, rat(1, 4));
  CHECK(closed_boxes_intersect(space, left, right));
  CHECK(!open_box_contains_point(space, left, {rat(1, 4)}));
  CHECK(!open_box_contains_point(space, right, {rat(1, 4)}));
  CHECK(closed_box_contains_point(space, left, {rat(1, 4)}));
  CHECK(closed_box_contains_point(space, right, {rat(1, 4)}));
}

TEST_CASE("thickening multiplies the width by exactly 11/10") {
  TorusQuotient space = make_torus(1, 0);
  Box b = make_box(space, {rat(1, 8)}, rat(1, 4));
  Box t = thicken(space, b);
  CHECK(t.width == rat(11, 40));
  CHECK(t.center == b.center);
}

TEST_CASE("thickening width 1/2 on the circle is still valid") {
  TorusQuotient space = make_torus(1, 1);
  Box b = make_box(space, {rat(1, 4)}, rat(1, 2));
  Box t = thicken(space, b);
  CHECK(t.width == rat(11, 20));
}

TEST_CASE("thickening that would wrap a circular axis is rejected") {
  TorusQuotient space = make_torus(1, 1);
  Box b = make_box(space, {rat(1, 2)}, rat(20, 21));
  CHECK_THROWS_AS(thicken(space, b), ResolutionError);
}

TEST_CASE("select_meeting around an interior point") {
  TorusQuotient space = make_torus(1, 0);
  CompactRegion K;
  K.points.push_back({rat(1, 8)});  // center of the first level-2 box
  std::vector<Box> sel = select_meeting(space, K, 2);
  // The thickened home box contains the point; the thickened neighbor
  // [1/4 - 11/80, ...] has closure reaching down to 0.1125 < 1/8? No:
  // 3/8 - 11/80 = 19/80 > 1/8, so only the home box meets the point.
  REQUIRE(sel.size() == 1);
  CHECK(sel[0].center == std::vector<Rat>{rat(1, 8)});
  CHECK(sel[0].width == rat(11, 40));
}

TEST_CASE("select_meeting catches thickened neighbors that reach the point") {
  TorusQuotient space = make_torus(1, 0);
  CompactRegion K;
  K.points.push_back({rat(1, 4)});  // boundary between the first two boxes
  std::vector<Box> sel = select_meeting(space, K, 2);
  CHECK(sel.size() == 2);
}

TEST_CASE("select_meeting on an empty region is empty") {
  TorusQuotient space = make_torus(2, 1);
  CompactRegion K;
  CHECK(select_meeting(space, K, 3).empty());
}

TEST_CASE("select_meeting on the full torus returns every box") {
  TorusQuotient space = make_torus(1, 1);
  CompactRegion K;
  K.boxes.push_back(make_box(space, {rat(1, 4)}, rat(1, 2)));
  K.boxes.push_back(make_box(space, {rat(3, 4)}, rat(1, 2)));
  std::vector<Box> sel = select_meeting(space, K, 3);
  CHECK(sel.size() == 8);
}

TEST_CASE("build_cover on the unit interval with constant radius") {
  TorusQuotient space = make_torus(1, 0);
  CompactRegion K;
  K.boxes.push_back(make_box(space, {rat(1, 2)}, Rat(1)));
  NeighborhoodFamily fam;
  fam.constant_radius = rat(3, 10);
  CoverResult cover = build_cover(space, K, fam);
  CHECK(cover.multiplicity <= 2);
  CHECK(cover.boxes.size() == cover.subordination.size());
  Rat pow2 = 1;
  for (int i = 0; i < cover.k_final; ++i) pow2 *= 2;
  for (const auto& b : cover.boxes) {
    CHECK(b.width == Rat(11) / (Rat(10) * pow2));
  }
}

TEST_CASE("build_cover of the full 2-torus stays within multiplicity 4") {
  TorusQuotient space = make_torus(2, 2);
  CompactRegion K;
  for (long i : {1, 3}) {
    for (long j : {1, 3}) {
      K.boxes.push_back(make_box(space, {rat(i, 4), rat(j, 4)}, rat(1, 2)));
    }
  }
  NeighborhoodFamily fam;
  fam.constant_radius = rat(2, 5);
  CoverResult cover = build_cover(space, K, fam);
  CHECK(cover.multiplicity <= 4);
  CHECK(!cover.boxes.empty());
}

TEST_CASE("build_cover of a single point uses one box") {
  TorusQuotient space = make_torus(2, 0);
  CompactRegion K;
  K.points.push_back({rat(1, 3), rat(2, 7)});
  NeighborhoodFamily fam;
  fam.constant_radius = rat(1, 4);
  CoverResult cover = build_cover(space, K, fam);
  CHECK(cover.multiplicity == 1);
  // Every cover box closure sits inside its witness neighborhood.
  for (std::size_t i = 0; i < cover.boxes.size(); ++i) {
    Box u;
    u.center = cover.subordination[i];
    u.width = *fam.constant_radius;
    CHECK(closed_box_inside_open_box(space, cover.boxes[i], u));
  }
}

TEST_CASE("build_cover certifies coverage and subordination on random regions") {
  Rng rng(71);
  for (int trial = 0; trial < 12; ++trial) {
    Rng r = rng.split(trial);
    int n = 1 + (int)r.below(3);
    int m = (int)r.below((std::uint64_t)n + 1);
    TorusQuotient space = make_torus(n, m);
    auto [K, fam] = random_region(r, space);
    if (K.empty()) continue;
    fam.sites.clear();
    fam.constant_radius = rat(1, 4);
    CoverResult cover = build_cover(space, K, fam);
    CHECK(cover.multiplicity <= (1 << n));
    for (std::size_t i = 0; i < cover.boxes.size(); ++i) {
      Box u;
      u.center = cover.subordination[i];
      u.width = *fam.constant_radius;
      CHECK(closed_box_inside_open_box(space, cover.boxes[i], u));
    }
    // K's sample points must land in some open cover box.
    for (const auto& pt : K.points) {
      bool covered = false;
      for (const auto& b : cover.boxes) {
        if (open_box_contains_point(space, b, pt)) covered = true;
      }
      CHECK(covered);
    }
  }
}

TEST_CASE("exact multiplicity of two disjoint boxes is 1") {
  TorusQuotient space = make_torus(1, 0);
  Box a = make_box(space, {Rat(0)}, rat(1, 4));
  Box b = make_box(space, {Rat(1)}, rat(1, 4));
  auto [mult, witness] = exact_multiplicity(space, {a, b});
  CHECK(mult == 1);
}

TEST_CASE("two boxes sharing a face count 2 at the shared point") {
  TorusQuotient space = make_torus(1, 0);
  Box a = make_box(space, {rat(1, 8)}, rat(1, 4));
  Box b = make_box(space, {rat(3, 8)}, rat(1, 4));
  auto [mult, witness] = exact_multiplicity(space, {a, b});
  CHECK(mult == 2);
  CHECK(closed_box_contains_point(space, a, witness));
  CHECK(closed_box_contains_point(space, b, witness));
}

TEST_CASE("thickened dyadic family on the circle has multiplicity 2") {
  TorusQuotient space = make_torus(1, 1);
  std::vector<Box> boxes = dyadic_boxes(space, 3, {Rat(0)}, {Rat(1)});
  std::vector<Box> thick;
  for (const auto& b : boxes) thick.push_back(thicken(space, b));
  auto [mult, witness] = exact_multiplicity(space, thick);
  CHECK(mult == 2);
}

TEST_CASE("multiplicity counting is wrap-aware on circular axes") {
  TorusQuotient space = make_torus(1, 1);
  // Boxes near 0 and near 1 overlap through the wrap.
  Box a = make_box(space, {rat(1, 20)}, rat(1, 4));
  Box b = make_box(space, {rat(19, 20)}, rat(1, 4));
  auto [mult, witness] = exact_multiplicity(space, {a, b});
  CHECK(mult == 2);
}

TEST_CASE("rational widths survive as exact strings") {
  CHECK(rat_to_string(rat(11, 40)) == "11/40");
  CHECK(rat_to_string(Rat(3)) == "3/1");
}
