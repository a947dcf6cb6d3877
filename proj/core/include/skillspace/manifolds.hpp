#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "skillspace/geometry.hpp"

namespace skillspace {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
  /// Distance from x to the interval; zero inside.
  double excess(double x) const { return x < lo ? lo - x : (x > hi ? x - hi : 0.0); }
  bool operator==(const Interval&) const = default;
};

/// Closed intervals over the free coordinates of a translation manifold.
/// Coordinate meaning per manifold:
///   Full3Space: x, y, z            Line: s along the axis from p
///   Circle: polar angle phi        Plane: s1, s2 in the in-plane basis
///   Cylinder: axial s [, phi]
/// Angles are measured from perpendicular_to(axis) towards axis x perpendicular_to(axis).
struct ExtentBounds {
  std::vector<Interval> dims;
  bool operator==(const ExtentBounds&) const = default;
};

// Translation manifolds.
struct Full3Space {
  /// Optional band lo <= (u - p).n <= hi carried by interval distance constraints.
  struct Slab {
    Vec3 p = Vec3::Zero();
    UnitVec3 n;
    Interval offset;
  };
  std::optional<Slab> slab;
};
struct PointManifold {
  Vec3 p = Vec3::Zero();
};
struct LineManifold {
  Vec3 p = Vec3::Zero();
  UnitVec3 a;
};
struct CircleManifold {
  Vec3 p = Vec3::Zero();
  UnitVec3 n;
  double r = 1.0;
};
struct PlaneManifold {
  Vec3 p = Vec3::Zero();
  UnitVec3 n;
};
struct CylinderManifold {
  Vec3 p = Vec3::Zero();
  UnitVec3 a;
  double r = 1.0;
};

/// Ordered from most to least restrictive (default model-selection order).
enum class TranslationType { Point, Line, Circle, Plane, Cylinder, Full3Space };

struct TranslationManifold {
  std::variant<Full3Space, PointManifold, LineManifold, CircleManifold, PlaneManifold, CylinderManifold> form;
  std::optional<ExtentBounds> bounds;

  TranslationType type() const;
};

// Rotation manifolds.
struct FullSO3 {};
struct OneParallel {
  UnitVec3 vf;
};
struct OneAngle {
  UnitVec3 vf;
  double theta = 0.0;  // radians in [0, pi]
  std::optional<Interval> interval;
};

/// Body axis of the constrained frame that plays the constrained vector.
enum class AxisSelector : std::uint8_t { PosX, NegX, PosY, NegY, PosZ, NegZ };

enum class RotationType { OneParallel, OneAngle, FullSO3 };

struct RotationManifold {
  std::variant<FullSO3, OneParallel, OneAngle> form;
  AxisSelector selector = AxisSelector::PosZ;

  RotationType type() const;
};

struct NullspaceModel {
  TranslationManifold translation;
  RotationManifold rotation;
  double rms_fit_residual = 0.0;
};

/// Overrides for sampling ranges; unset fields fall back to the manifold bounds.
struct SampleSpec {
  std::optional<ExtentBounds> translation_range;
  std::optional<Interval> angle_range;
};

std::string to_string(TranslationType t);
std::string to_string(RotationType t);
std::string to_string(AxisSelector s);
TranslationType translation_type_from_string(const std::string& s);
RotationType rotation_type_from_string(const std::string& s);
AxisSelector axis_selector_from_string(const std::string& s);

/// Number of free dimensions of the manifold.
int dimension(TranslationType t);
int dimension(RotationType t);

/// Throws InvalidArgument when direction/radius/bounds invariants fail.
void validate(const TranslationManifold& m);
void validate(const RotationManifold& m);

Vec3 unit_axis(AxisSelector s);
UnitVec3 constrained_axis(const Rotation& r, AxisSelector s);

/// Orthonormal in-plane basis (e1, e2) for a normal/axis direction.
std::pair<Vec3, Vec3> plane_basis(const UnitVec3& n);

Vec3 project_translation(const TranslationManifold& m, const Vec3& u);
double dist_t(const TranslationManifold& m, const Vec3& u);

Rotation project_rotation(const RotationManifold& m, const Rotation& r);
/// Chordal quaternion distance, minimized over the sign of the quaternion.
double dist_r(const RotationManifold& m, const Rotation& r);
double quaternion_distance(const Rotation& a, const Rotation& b);
/// Angular violation (radians) of the rotation constraint; 0 on the manifold.
double rotation_violation(const RotationManifold& m, const Rotation& r);

/// Free coordinates of the projection of u (see ExtentBounds for the layout).
std::vector<double> coordinates(const TranslationManifold& m, const Vec3& u);
/// Point of the manifold at the given free coordinates.
Vec3 point_at(const TranslationManifold& m, const std::vector<double>& coords);
/// Distance (meters) by which the projection of u leaves the extent bounds/slab.
double bounds_violation(const TranslationManifold& m, const Vec3& u);

double dist_t(const NullspaceModel& n, const Pose& p);
double dist_r(const NullspaceModel& n, const Pose& p);

/// Model expressed in another frame: x_new = pose(x_old).
TranslationManifold transformed(const TranslationManifold& m, const Pose& pose);
RotationManifold transformed(const RotationManifold& m, const Pose& pose);
NullspaceModel transformed(const NullspaceModel& n, const Pose& pose);

/// Deterministic pose sample from the nullspace. Throws UnboundedDomain when a
/// free translation coordinate has no finite range.
Pose sample_pose(const NullspaceModel& n, const SampleSpec& spec, std::uint64_t seed);

}  // namespace skillspace
