#pragma once

// Shared helpers for the unit and acceptance tests.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "skillspace/io.hpp"
#include "skillspace/random.hpp"

namespace skillspace::testing {

inline constexpr double kPi = std::numbers::pi;

inline double axis_error(const Vec3& a, const Vec3& b) { return std::min(angle_between(a, b), angle_between(a, -b)); }

inline double line_offset(const Vec3& q, const Vec3& p, const Vec3& a) {
  const Vec3 d = q - p;
  return (d - d.dot(a) * a).norm();
}

inline UnitVec3 random_direction(Rng& rng) { return rng.direction(); }

inline Vec3 random_point(Rng& rng, double half = 0.5) {
  return {rng.uniform(-half, half), rng.uniform(-half, half), rng.uniform(-half, half)};
}

inline TranslationManifold translation(const decltype(TranslationManifold::form)& form,
                                       std::optional<ExtentBounds> bounds = std::nullopt) {
  TranslationManifold m;
  m.form = form;
  m.bounds = std::move(bounds);
  return m;
}

inline RotationManifold rotation(const decltype(RotationManifold::form)& form,
                                 AxisSelector sel = AxisSelector::PosZ) {
  RotationManifold m;
  m.form = form;
  m.selector = sel;
  return m;
}

inline NullspaceModel model(TranslationManifold t, RotationManifold r) {
  NullspaceModel n;
  n.translation = std::move(t);
  n.rotation = std::move(r);
  return n;
}

/// Noisy (or exact) samples of a raw model, through the synthetic generator.
inline Demonstration demonstrate(const NullspaceModel& n, int count, std::uint64_t seed, double sigma_t = 0.0,
                                 double sigma_r = 0.0) {
  GeneratorSpec g;
  g.model = n;
  g.count = count;
  g.seed = seed;
  g.sigma_t = sigma_t;
  g.sigma_r = sigma_r;
  const Recording r = generate_demonstration(g);
  return derive_demonstration(r, g.fixed_frame, g.constrained_frame);
}

inline Demonstration from_poses(std::vector<Pose> poses, DemonstrationKind kind = DemonstrationKind::Discrete) {
  Demonstration d;
  d.kind = kind;
  d.fixed_label = "fixed";
  d.constrained_label = "constrained";
  for (std::size_t i = 0; i < poses.size(); ++i) {
    if (!poses[i].timestamp) poses[i].timestamp = static_cast<double>(i);
  }
  d.samples = std::move(poses);
  return d;
}

/// Equivalent forms collapse: Distance 0 is Coincident, Angle 0 is Parallel
/// and a line-line coincidence is a concentricity.
inline GeometricConstraint canonical(GeometricConstraint c) {
  if (c.relation == Relation::Distance && c.value && *c.value == 0.0) {
    c.relation = Relation::Coincident;
    c.value.reset();
  }
  if (c.relation == Relation::Angle && c.value && *c.value == 0.0) {
    c.relation = Relation::Parallel;
    c.value.reset();
  }
  if (c.relation == Relation::Coincident && c.fixed.kind == ShapeKind::Line && c.constrained.kind == ShapeKind::Line)
    c.relation = Relation::Concentric;
  return c;
}

inline bool same_relation(const GeometricConstraint& a, const GeometricConstraint& b) {
  const auto x = canonical(a), y = canonical(b);
  return x.fixed == y.fixed && x.constrained == y.constrained && x.relation == y.relation &&
         x.value.has_value() == y.value.has_value() && x.interval.has_value() == y.interval.has_value();
}

/// Largest value/interval-end difference between two same-relation constraints.
inline double value_gap(const GeometricConstraint& a, const GeometricConstraint& b) {
  const auto x = canonical(a), y = canonical(b);
  double g = 0.0;
  if (x.value && y.value) g = std::max(g, std::abs(*x.value - *y.value));
  if (x.interval && y.interval)
    g = std::max({g, std::abs(x.interval->lo - y.interval->lo), std::abs(x.interval->hi - y.interval->hi)});
  return g;
}

}  // namespace skillspace::testing
