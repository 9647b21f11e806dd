#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fibenv {

using PointId = std::string;

// Finite model of a locally compact space. The optional infinity point is the
// designated vanishing point: admissible functions and measures put nothing
// there.
class FiniteSpace {
 public:
  FiniteSpace() = default;
  FiniteSpace(std::vector<PointId> points,
              std::optional<PointId> infinity_point = std::nullopt,
              std::map<PointId, std::string> labels = {});

  const std::vector<PointId>& points() const { return points_; }
  const std::optional<PointId>& infinity_point() const { return infinity_point_; }
  const std::map<PointId, std::string>& labels() const { return labels_; }

  std::size_t size() const { return points_.size(); }
  bool has_point(const PointId& id) const { return index_.count(id) != 0; }
  std::size_t index_of(const PointId& id) const;
  const PointId& point_at(std::size_t i) const { return points_[i]; }
  bool is_infinity(const PointId& id) const {
    return infinity_point_ && *infinity_point_ == id;
  }

  bool same_as(const FiniteSpace& other) const {
    return points_ == other.points_ && infinity_point_ == other.infinity_point_;
  }

 private:
  std::vector<PointId> points_;
  std::optional<PointId> infinity_point_;
  std::map<PointId, std::string> labels_;
  std::map<PointId, std::size_t> index_;
};

// Total map between finite spaces. Fibers are finite by construction; when
// both spaces carry infinity points, infinity must map to infinity.
class FiberedMap {
 public:
  FiberedMap() = default;
  FiberedMap(FiniteSpace source, FiniteSpace target,
             std::map<PointId, PointId> assignment);

  const FiniteSpace& source() const { return source_; }
  const FiniteSpace& target() const { return target_; }
  const PointId& apply(const PointId& x) const;
  const std::map<PointId, PointId>& assignment() const { return assignment_; }

 private:
  FiniteSpace source_;
  FiniteSpace target_;
  std::map<PointId, PointId> assignment_;
};

// Nonnegative weights per point; zero mass at the infinity point.
class WeightedMeasure {
 public:
  WeightedMeasure() = default;
  WeightedMeasure(FiniteSpace space, std::map<PointId, double> weights);

  // Skips the invariant checks; for building fixtures that validate_system
  // is expected to reject.
  static WeightedMeasure unchecked(FiniteSpace space,
                                   std::map<PointId, double> weights);

  const FiniteSpace& space() const { return space_; }
  double weight(const PointId& id) const;
  const std::map<PointId, double>& weights() const { return weights_; }
  double total_mass() const;

 private:
  FiniteSpace space_;
  std::map<PointId, double> weights_;
};

// Map plus measures; the downstairs measure is always recomputed from the
// upstairs one, never taken on trust.
class FiberedSystem {
 public:
  FiberedSystem() = default;
  FiberedSystem(FiberedMap map, WeightedMeasure measure_upstairs);

  const FiberedMap& map() const { return map_; }
  const WeightedMeasure& measure_upstairs() const { return measure_upstairs_; }
  const WeightedMeasure& measure_downstairs() const { return measure_downstairs_; }

 private:
  FiberedMap map_;
  WeightedMeasure measure_upstairs_;
  WeightedMeasure measure_downstairs_;
};

WeightedMeasure pushforward_measure(const FiberedMap& map, const WeightedMeasure& mu);

// target point -> ordered list of source points above it. Every target point
// appears, including those with empty fiber.
std::map<PointId, std::vector<PointId>> fibers_of(const FiberedMap& map);

struct ValidationIssue {
  std::string kind;   // "negative-weight", "infinity-mass", "pushforward-mismatch"
  PointId point;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
};

// Diagnostic check of a system against a claimed downstairs measure.
ValidationReport validate_system(const FiberedSystem& sys,
                                 const WeightedMeasure& claimed_downstairs);
ValidationReport validate_system(const FiberedSystem& sys);

}  // namespace fibenv
