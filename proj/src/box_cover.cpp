#include "fibenv/box_cover.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "fibenv/errors.hpp"

namespace fibenv {

namespace {

using BigInt = boost::multiprecision::cpp_int;

BigInt floor_rat(const Rat& r) {
  BigInt num = numerator(r), den = denominator(r);  // den > 0 by normalization
  BigInt q = num / den;
  if (num < 0 && q * den != num) --q;
  return q;
}

BigInt ceil_rat(const Rat& r) { return -floor_rat(-r); }

// Reduce to [0, 1).
Rat mod1(const Rat& r) { return r - Rat(floor_rat(r)); }

Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

// Distance along one axis; wrap-aware on circular axes.
Rat axis_dist(const TorusQuotient& space, int axis, const Rat& a, const Rat& b) {
  Rat d = rat_abs(a - b);
  if (space.circular(axis)) {
    d = mod1(d);
    Rat alt = Rat(1) - d;
    if (alt < d) d = alt;
  }
  return d;
}

Rat pow2_inv(int k) {
  BigInt den = BigInt(1) << k;
  return Rat(BigInt(1), den);
}

}  // namespace

TorusQuotient make_torus(int n, int m) {
  if (n < 1 || m < 0 || m > n) throw ArgumentError("torus: require 0 <= m <= n, n >= 1");
  return TorusQuotient{n, m};
}

Box make_box(const TorusQuotient& space, std::vector<Rat> center, Rat width) {
  if (static_cast<int>(center.size()) != space.n) {
    throw ArgumentError("box center dimension mismatch");
  }
  if (!(width > 0)) throw ArgumentError("box width must be positive");
  for (int i = 0; i < space.m; ++i) {
    if (!(width < 1)) throw ArgumentError("box width must be below 1 on circular axes");
    center[i] = mod1(center[i]);
  }
  return Box{std::move(center), std::move(width)};
}

Rat NeighborhoodFamily::r_min() const {
  Rat r{0};
  bool have = false;
  if (constant_radius) {
    r = *constant_radius;
    have = true;
  }
  for (const auto& s : sites) {
    if (!have || s.radius < r) {
      r = s.radius;
      have = true;
    }
  }
  if (!have || !(r > 0)) throw ArgumentError("neighborhood family needs r_min > 0");
  return r;
}

bool closed_box_contains_point(const TorusQuotient& space, const Box& box,
                               const std::vector<Rat>& p) {
  for (int i = 0; i < space.n; ++i) {
    if (axis_dist(space, i, p[i], box.center[i]) > box.width / 2) return false;
  }
  return true;
}

bool open_box_contains_point(const TorusQuotient& space, const Box& box,
                             const std::vector<Rat>& p) {
  for (int i = 0; i < space.n; ++i) {
    if (!(axis_dist(space, i, p[i], box.center[i]) < box.width / 2)) return false;
  }
  return true;
}

bool closed_box_inside_open_box(const TorusQuotient& space, const Box& inner,
                                const Box& outer) {
  for (int i = 0; i < space.n; ++i) {
    Rat margin = (outer.width - inner.width) / 2;
    if (!(axis_dist(space, i, inner.center[i], outer.center[i]) < margin)) return false;
  }
  return true;
}

bool closed_boxes_intersect(const TorusQuotient& space, const Box& a, const Box& b) {
  for (int i = 0; i < space.n; ++i) {
    if (axis_dist(space, i, a.center[i], b.center[i]) > (a.width + b.width) / 2) {
      return false;
    }
  }
  return true;
}

std::vector<Box> dyadic_boxes(const TorusQuotient& space, int k,
                              const std::vector<Rat>& window_lo,
                              const std::vector<Rat>& window_hi) {
  if (k < 1) throw ArgumentError("dyadic level must be >= 1");
  if (static_cast<int>(window_lo.size()) != space.n ||
      static_cast<int>(window_hi.size()) != space.n) {
    throw ArgumentError("window dimension mismatch");
  }
  const Rat w = pow2_inv(k);
  const BigInt cells = BigInt(1) << k;

  // Per-axis center index ranges: centers (j + 1/2)/2^k whose closed cell
  // meets the window. Circular axes fall back to the full period only when
  // the window wraps all the way around.
  std::vector<std::vector<BigInt>> axis_indices(space.n);
  BigInt total = 1;
  for (int i = 0; i < space.n; ++i) {
    BigInt lo = ceil_rat(window_lo[i] / w - 1);
    BigInt hi = floor_rat(window_hi[i] / w);
    if (space.circular(i) && hi - lo + 1 >= cells) {
      lo = 0;
      hi = cells - 1;
    }
    for (BigInt j = lo; j <= hi; ++j) axis_indices[i].push_back(j);
    total *= BigInt(axis_indices[i].size());
    if (total > (BigInt(1) << 24)) {
      throw ResolutionError("dyadic enumeration too large at level " +
                            std::to_string(k));
    }
  }

  std::vector<Box> out;
  std::vector<std::size_t> idx(space.n, 0);
  for (int i = 0; i < space.n; ++i) {
    if (axis_indices[i].empty()) return out;
  }
  for (;;) {
    std::vector<Rat> center(space.n);
    for (int i = 0; i < space.n; ++i) {
      center[i] = Rat(2 * axis_indices[i][idx[i]] + 1) * w / 2;
      if (space.circular(i)) center[i] = mod1(center[i]);
    }
    out.push_back(Box{std::move(center), w});
    int a = 0;
    while (a < space.n && ++idx[a] == axis_indices[a].size()) idx[a++] = 0;
    if (a == space.n) break;
  }
  return out;
}

Box thicken(const TorusQuotient& space, const Box& box) {
  Rat w = box.width * Rat(11, 10);
  for (int i = 0; i < space.m; ++i) {
    if (!(w < 1)) {
      throw ResolutionError("thicken: level too coarse, thickened box would wrap");
    }
  }
  return Box{box.center, std::move(w)};
}

namespace {

bool closure_meets_region(const TorusQuotient& space, const Box& box,
                          const CompactRegion& K) {
  for (const auto& kb : K.boxes) {
    if (closed_boxes_intersect(space, box, kb)) return true;
  }
  for (const auto& p : K.points) {
    // Point fattened by a closed L-inf ball of radius K.fattening.
    Box pb{p, 2 * K.fattening};
    if (K.fattening == 0) {
      if (closed_box_contains_point(space, box, p)) return true;
    } else if (closed_boxes_intersect(space, box, pb)) {
      return true;
    }
  }
  return false;
}

// Window enclosing the region with the given margin on non-circular axes.
void region_window(const TorusQuotient& space, const CompactRegion& K, const Rat& margin,
                   std::vector<Rat>& lo, std::vector<Rat>& hi) {
  lo.assign(space.n, Rat(0));
  hi.assign(space.n, Rat(0));
  bool first = true;
  auto absorb = [&](const std::vector<Rat>& c, const Rat& half) {
    for (int i = 0; i < space.n; ++i) {
      Rat l = c[i] - half, h = c[i] + half;
      if (first) {
        lo[i] = l;
        hi[i] = h;
      } else {
        lo[i] = std::min(lo[i], l);
        hi[i] = std::max(hi[i], h);
      }
    }
    first = false;
  };
  for (const auto& b : K.boxes) absorb(b.center, b.width / 2);
  for (const auto& p : K.points) absorb(p, K.fattening);
  for (int i = 0; i < space.n; ++i) {
    lo[i] -= margin;
    hi[i] += margin;
  }
}

}  // namespace

std::vector<Box> select_meeting(const TorusQuotient& space, const CompactRegion& K,
                                int k) {
  std::vector<Rat> lo, hi;
  if (K.empty()) return {};
  region_window(space, K, Rat(2) * pow2_inv(k), lo, hi);
  std::vector<Box> out;
  for (const auto& b : dyadic_boxes(space, k, lo, hi)) {
    Box t = thicken(space, b);
    if (closure_meets_region(space, t, K)) out.push_back(std::move(t));
  }
  return out;
}

namespace {

// A witness site whose open box contains the closed box, or nothing.
std::optional<std::vector<Rat>> subordination_witness(
    const TorusQuotient& space, const CompactRegion& K,
    const NeighborhoodFamily& family, const Box& closed_box) {
  for (const auto& s : family.sites) {
    if (closed_box_inside_open_box(space, closed_box,
                                   Box{s.center, s.radius})) {
      return s.center;
    }
  }
  if (family.constant_radius) {
    const Rat r = *family.constant_radius;
    // Any region point inside the closed box serves as the site; the box
    // fits in its neighborhood as soon as dist + w/2 < r/2 per axis.
    auto fits_at = [&](const std::vector<Rat>& x) {
      return closed_box_inside_open_box(space, closed_box, Box{x, r});
    };
    for (const auto& p : K.points) {
      if (closed_box_contains_point(space, closed_box, p) && fits_at(p)) return p;
    }
    // Fattened points behave like region boxes of width 2*fattening; a box
    // can meet the halo without containing the raw point.
    std::vector<Box> effective = K.boxes;
    if (K.fattening > 0) {
      for (const auto& p : K.points) effective.push_back(Box{p, 2 * K.fattening});
    }
    for (const auto& kb : effective) {
      if (closed_boxes_intersect(space, closed_box, kb)) {
        // Closest point of the closed region box to the cover box center.
        std::vector<Rat> q(space.n);
        for (int i = 0; i < space.n; ++i) {
          Rat c = closed_box.center[i];
          Rat klo = kb.center[i] - kb.width / 2;
          Rat khi = kb.center[i] + kb.width / 2;
          if (space.circular(i)) {
            // Work with the representative of c nearest to the region box.
            Rat d = c - kb.center[i];
            Rat dm = mod1(d + Rat(1, 2)) - Rat(1, 2);  // in [-1/2, 1/2)
            c = kb.center[i] + dm;
          }
          q[i] = std::min(std::max(c, klo), khi);
          if (space.circular(i)) q[i] = mod1(q[i]);
        }
        if (fits_at(q)) return q;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

CoverResult build_cover(const TorusQuotient& space, const CompactRegion& K,
                        const NeighborhoodFamily& family) {
  if (K.empty()) throw ArgumentError("build_cover: K must be nonempty");
  const Rat r_min = family.r_min();
  const Rat eps = r_min / 4;  // K_eps stays inside the union of neighborhoods

  CoverResult result;
  for (int k = 1; k <= 40; ++k) {
    Rat thick_w = pow2_inv(k) * Rat(11, 10);
    bool circular_ok = (space.m == 0) || thick_w < 1;
    // Lebesgue-style bound: thickened diameter below half the minimum radius
    // and inside the eps-fattening of K.
    if (!circular_ok || !(thick_w < r_min / 2) || !(thick_w <= eps)) continue;

    std::vector<Box> candidate = select_meeting(space, K, k);
    std::vector<std::vector<Rat>> witnesses;
    bool all_subordinate = true;
    for (const auto& b : candidate) {
      auto w = subordination_witness(space, K, family, b);
      if (!w) {
        all_subordinate = false;
        break;
      }
      witnesses.push_back(std::move(*w));
    }
    if (!all_subordinate) continue;

    result.boxes = std::move(candidate);
    result.subordination = std::move(witnesses);
    result.k_final = k;
    auto [mult, witness] = exact_multiplicity(space, result.boxes);
    result.multiplicity = mult;
    result.multiplicity_witness = std::move(witness);
    return result;
  }
  throw ResolutionError(
      "build_cover: no dyadic level up to 40 yields a subordinated cover; radii "
      "too small for the grid resolution");
}

std::pair<int, std::vector<Rat>> exact_multiplicity(const TorusQuotient& space,
                                                    const std::vector<Box>& boxes) {
  if (boxes.empty()) return {0, std::vector<Rat>(space.n, Rat(0))};

  // Recursive sweep over the arrangement of interval endpoints, axis by axis.
  // The count function is per-axis piecewise constant and its maximum is
  // attained at an endpoint, so the endpoint grid is exhaustive.
  int best = 0;
  std::vector<Rat> best_point(space.n, Rat(0));
  std::vector<Rat> current(space.n, Rat(0));
  std::vector<std::size_t> active(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) active[i] = i;

  auto sweep = [&](auto&& self, int axis, const std::vector<std::size_t>& subset) -> void {
    if (subset.empty()) return;
    if (axis == space.n) {
      if (static_cast<int>(subset.size()) > best) {
        best = static_cast<int>(subset.size());
        best_point = current;
      }
      return;
    }
    std::set<Rat> coords;
    for (std::size_t i : subset) {
      Rat lo = boxes[i].center[axis] - boxes[i].width / 2;
      Rat hi = boxes[i].center[axis] + boxes[i].width / 2;
      if (space.circular(axis)) {
        coords.insert(mod1(lo));
        coords.insert(mod1(hi));
      } else {
        coords.insert(lo);
        coords.insert(hi);
      }
    }
    for (const Rat& t : coords) {
      std::vector<std::size_t> next;
      for (std::size_t i : subset) {
        if (axis_dist(space, axis, t, boxes[i].center[axis]) <= boxes[i].width / 2) {
          next.push_back(i);
        }
      }
      if (static_cast<int>(next.size()) <= best) continue;  // cannot improve
      current[axis] = t;
      self(self, axis + 1, next);
    }
  };
  sweep(sweep, 0, active);
  return {best, best_point};
}

std::string rat_to_string(const Rat& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

}  // namespace fibenv
