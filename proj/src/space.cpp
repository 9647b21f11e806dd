#include "fibenv/space.hpp"

#include <cmath>
#include <sstream>

#include "fibenv/errors.hpp"

namespace fibenv {

FiniteSpace::FiniteSpace(std::vector<PointId> points,
                         std::optional<PointId> infinity_point,
                         std::map<PointId, std::string> labels)
    : points_(std::move(points)),
      infinity_point_(std::move(infinity_point)),
      labels_(std::move(labels)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!index_.emplace(points_[i], i).second) {
      throw ConfigError("duplicate point id '" + points_[i] + "'");
    }
  }
  if (infinity_point_ && index_.count(*infinity_point_) == 0) {
    throw ConfigError("infinity point '" + *infinity_point_ +
                      "' is not a member of the space");
  }
}

std::size_t FiniteSpace::index_of(const PointId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw ConfigError("unknown point id '" + id + "'");
  return it->second;
}

FiberedMap::FiberedMap(FiniteSpace source, FiniteSpace target,
                       std::map<PointId, PointId> assignment)
    : source_(std::move(source)),
      target_(std::move(target)),
      assignment_(std::move(assignment)) {
  for (const auto& x : source_.points()) {
    auto it = assignment_.find(x);
    if (it == assignment_.end()) {
      throw ConfigError("map is not total: no image for '" + x + "'");
    }
    if (!target_.has_point(it->second)) {
      throw ConfigError("map image '" + it->second + "' is not a target point");
    }
  }
  if (assignment_.size() != source_.size()) {
    throw ConfigError("map assigns images to points outside the source space");
  }
  if (source_.infinity_point() && target_.infinity_point()) {
    if (apply(*source_.infinity_point()) != *target_.infinity_point()) {
      throw ConfigError("infinity must map to infinity");
    }
  }
}

const PointId& FiberedMap::apply(const PointId& x) const {
  auto it = assignment_.find(x);
  if (it == assignment_.end()) throw ConfigError("unknown source point '" + x + "'");
  return it->second;
}

WeightedMeasure::WeightedMeasure(FiniteSpace space, std::map<PointId, double> weights)
    : space_(std::move(space)), weights_(std::move(weights)) {
  for (const auto& [id, w] : weights_) {
    if (!space_.has_point(id)) {
      throw ConfigError("weight assigned to unknown point '" + id + "'");
    }
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ConfigError("weight at '" + id + "' must be finite and nonnegative");
    }
    if (space_.is_infinity(id) && w != 0.0) {
      throw ConfigError("nonzero mass at the infinity point '" + id + "'");
    }
  }
}

WeightedMeasure WeightedMeasure::unchecked(FiniteSpace space,
                                           std::map<PointId, double> weights) {
  WeightedMeasure mu;
  mu.space_ = std::move(space);
  mu.weights_ = std::move(weights);
  return mu;
}

double WeightedMeasure::weight(const PointId& id) const {
  auto it = weights_.find(id);
  if (it != weights_.end()) return it->second;
  if (!space_.has_point(id)) throw ConfigError("unknown point id '" + id + "'");
  return 0.0;
}

double WeightedMeasure::total_mass() const {
  double total = 0.0;
  for (const auto& [id, w] : weights_) total += w;
  return total;
}

FiberedSystem::FiberedSystem(FiberedMap map, WeightedMeasure measure_upstairs)
    : map_(std::move(map)), measure_upstairs_(std::move(measure_upstairs)) {
  if (!measure_upstairs_.space().same_as(map_.source())) {
    throw ConfigError("upstairs measure lives on a different space than the map source");
  }
  measure_downstairs_ = pushforward_measure(map_, measure_upstairs_);
}

WeightedMeasure pushforward_measure(const FiberedMap& map, const WeightedMeasure& mu) {
  if (!mu.space().same_as(map.source())) {
    throw ConfigError("pushforward: measure space does not match map source");
  }
  std::map<PointId, double> down;
  for (const auto& x : map.source().points()) {
    down[map.apply(x)] += mu.weight(x);
  }
  // Unchecked: diagnostic fixtures are allowed to carry invalid upstairs
  // weights, and the pushforward must still be computable so that
  // validate_system can point at them.
  return WeightedMeasure::unchecked(map.target(), std::move(down));
}

std::map<PointId, std::vector<PointId>> fibers_of(const FiberedMap& map) {
  std::map<PointId, std::vector<PointId>> fibers;
  for (const auto& y : map.target().points()) fibers[y];  // empty fibers included
  for (const auto& x : map.source().points()) {
    fibers[map.apply(x)].push_back(x);
  }
  return fibers;
}

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

ValidationReport validate_system(const FiberedSystem& sys,
                                 const WeightedMeasure& claimed_downstairs) {
  ValidationReport report;
  const auto& mu = sys.measure_upstairs();
  for (const auto& x : mu.space().points()) {
    double w = mu.weight(x);
    if (w < 0.0) {
      report.issues.push_back({"negative-weight", x, format_double(w)});
    }
    if (mu.space().is_infinity(x) && w != 0.0) {
      report.issues.push_back({"infinity-mass", x, format_double(w)});
    }
  }
  const WeightedMeasure expected = pushforward_measure(sys.map(), mu);
  const double total = expected.total_mass();
  for (const auto& y : sys.map().target().points()) {
    double want = expected.weight(y);
    double got = claimed_downstairs.weight(y);
    double tol = 1e-12 * (1.0 + total);
    if (std::abs(want - got) > tol) {
      report.issues.push_back({"pushforward-mismatch", y,
                               "expected " + format_double(want) + ", got " +
                                   format_double(got)});
    }
  }
  return report;
}

ValidationReport validate_system(const FiberedSystem& sys) {
  return validate_system(sys, sys.measure_downstairs());
}

}  // namespace fibenv
