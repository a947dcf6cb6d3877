#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace skillspace {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Error categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  InvalidArgument,
  InsufficientData,
  Parse,
  Unsupported,
  UnboundedDomain,
  Infeasible,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

/// Direction vector with unit Euclidean norm (within 1e-9).
class UnitVec3 {
public:
  UnitVec3() : v_(Vec3::UnitZ()) {}

  /// Rejects vectors whose norm deviates from one by more than 1e-9.
  static UnitVec3 checked(const Vec3& v);
  /// Normalizes any non-zero finite vector.
  static UnitVec3 normalized(const Vec3& v);

  const Vec3& vec() const noexcept { return v_; }
  operator const Vec3&() const noexcept { return v_; }
  double operator[](int i) const { return v_[i]; }
  UnitVec3 operator-() const { return UnitVec3(-v_); }
  double dot(const Vec3& o) const { return v_.dot(o); }

private:
  explicit UnitVec3(const Vec3& v) : v_(v) {}
  Vec3 v_;
};

/// Unit quaternion kept in canonical form (w >= 0).
class Rotation {
public:
  Rotation() : q_(Eigen::Quaterniond::Identity()) {}
  explicit Rotation(const Eigen::Quaterniond& q);
  static Rotation from_wxyz(double w, double x, double y, double z);
  static Rotation from_matrix(const Mat3& m);
  static Rotation identity() { return Rotation(); }

  const Eigen::Quaterniond& quat() const noexcept { return q_; }
  Eigen::Vector4d wxyz() const { return {q_.w(), q_.x(), q_.y(), q_.z()}; }
  Mat3 matrix() const { return q_.toRotationMatrix(); }

  Rotation operator*(const Rotation& o) const { return Rotation(q_ * o.q_); }
  Vec3 operator*(const Vec3& v) const { return q_ * v; }
  Rotation inverse() const { return Rotation(q_.conjugate()); }

  /// Rotation vector (axis * angle), angle in [0, pi].
  Vec3 log() const;

private:
  Eigen::Quaterniond q_;
};

Rotation rotation_from_axis_angle(const UnitVec3& axis, double angle);
/// Throws InvalidArgument for a non-unit axis.
Rotation rotation_from_axis_angle(const Vec3& axis, double angle);
/// Rotation of angle |v| about v/|v|; zero vector gives identity.
Rotation rotation_from_vector(const Vec3& v);
/// Minimal rotation taking direction `from` onto direction `to`.
Rotation rotation_between(const UnitVec3& from, const UnitVec3& to);

/// Angle between two directions in [0, pi], computed with atan2 so it stays
/// accurate near 0 and pi.
double angle_between(const Vec3& a, const Vec3& b);

/// Deterministic unit vector perpendicular to `axis`: normalized rejection of
/// the global x-axis, falling back to the global y-axis.
UnitVec3 perpendicular_to(const UnitVec3& axis);

struct Pose {
  Vec3 translation = Vec3::Zero();
  Rotation rotation;
  std::optional<double> timestamp;

  static Pose identity() { return {}; }
  static Pose from_translation(const Vec3& t) { return {t, Rotation(), std::nullopt}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_direction(const Vec3& d) const { return rotation * d; }
  Pose inverse() const;
};

/// Rigid composition a∘b (apply b first, then a). Keeps a's timestamp if b has none.
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);
/// The constrained frame expressed in the fixed frame.
Pose relative_pose(const Pose& fixed_frame, const Pose& constrained_frame);

// Primitive shapes. Positions in meters; directions unit-norm.
struct PointShape {
  Vec3 p = Vec3::Zero();
};
struct LineShape {
  Vec3 p = Vec3::Zero();
  UnitVec3 a;
};
struct PlaneShape {
  Vec3 p = Vec3::Zero();
  UnitVec3 n;
};
struct CircleShape {
  Vec3 p = Vec3::Zero();
  UnitVec3 n;
  double r = 1.0;
};
/// Finite cylinder; p is the axis point at mid-height, h the full height.
struct CylinderShape {
  Vec3 p = Vec3::Zero();
  UnitVec3 a;
  double r = 1.0;
  double h = 1.0;
};

using ShapeGeometry = std::variant<PointShape, LineShape, PlaneShape, CircleShape, CylinderShape>;

enum class ShapeKind { Point, Line, Plane, Circle, Cylinder };

struct Shape {
  std::string owner;  // object label, e.g. "cup"
  std::string name;   // shape label, e.g. "body"
  ShapeGeometry geometry;

  ShapeKind kind() const { return static_cast<ShapeKind>(geometry.index()); }
  /// "owner/name"
  std::string qualified_name() const { return owner + "/" + name; }
};

/// Throws InvalidArgument when radii/heights are not strictly positive.
void validate(const Shape& s);
/// Shape with its geometry mapped through `pose`.
Shape transformed(const Shape& s, const Pose& pose);

std::string to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(const std::string& s);

}  // namespace skillspace
