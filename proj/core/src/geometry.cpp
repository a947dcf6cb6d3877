#include "skillspace/geometry.hpp"

#include <cmath>
#include <limits>

namespace skillspace {

UnitVec3 UnitVec3::checked(const Vec3& v) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidArgument, "direction vector is not unit-norm");
  }
  return UnitVec3(v);
}

UnitVec3 UnitVec3::normalized(const Vec3& v) {
  const double n = v.norm();
  if (!v.allFinite() || n < 1e-300) {
    throw Error(ErrorKind::InvalidArgument, "cannot normalize a zero or non-finite vector");
  }
  return UnitVec3(v / n);
}

Rotation::Rotation(const Eigen::Quaterniond& q) : q_(q) {
  const double n = q_.norm();
  if (!std::isfinite(n) || n < 1e-300) {
    throw Error(ErrorKind::InvalidArgument, "degenerate quaternion");
  }
  // Already-unit input is kept bit-for-bit so that serialization round trips.
  if (std::abs(n - 1.0) > 4.0 * std::numeric_limits<double>::epsilon()) q_.coeffs() /= n;
  if (q_.w() < 0.0) q_.coeffs() = -q_.coeffs();
}

Rotation Rotation::from_wxyz(double w, double x, double y, double z) {
  return Rotation(Eigen::Quaterniond(w, x, y, z));
}

Rotation Rotation::from_matrix(const Mat3& m) { return Rotation(Eigen::Quaterniond(m)); }

Vec3 Rotation::log() const {
  const Vec3 v = q_.vec();
  const double s = v.norm();
  if (s < 1e-300) return Vec3::Zero();
  const double angle = 2.0 * std::atan2(s, q_.w());
  return v * (angle / s);
}

Rotation rotation_from_axis_angle(const UnitVec3& axis, double angle) {
  const double h = 0.5 * angle;
  const Vec3 xyz = axis.vec() * std::sin(h);
  return Rotation(Eigen::Quaterniond(std::cos(h), xyz.x(), xyz.y(), xyz.z()));
}

Rotation rotation_from_axis_angle(const Vec3& axis, double angle) {
  return rotation_from_axis_angle(UnitVec3::checked(axis), angle);
}

Rotation rotation_from_vector(const Vec3& v) {
  const double angle = v.norm();
  if (angle < 1e-300) return Rotation();
  return rotation_from_axis_angle(UnitVec3::normalized(v), angle);
}

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

UnitVec3 perpendicular_to(const UnitVec3& axis) {
  const Vec3& a = axis.vec();
  Vec3 r = Vec3::UnitX() - a.x() * a;
  if (r.norm() < 1e-6) r = Vec3::UnitY() - a.y() * a;
  return UnitVec3::normalized(r);
}

Rotation rotation_between(const UnitVec3& from, const UnitVec3& to) {
  const Vec3 c = from.vec().cross(to.vec());
  const double angle = angle_between(from, to);
  if (c.norm() < 1e-12) {
    if (angle < 1.0) return Rotation();
    return rotation_from_axis_angle(perpendicular_to(from), angle);
  }
  return rotation_from_axis_angle(UnitVec3::normalized(c), angle);
}

Pose Pose::inverse() const {
  const Rotation inv = rotation.inverse();
  return {-(inv * translation), inv, timestamp};
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  out.timestamp = b.timestamp ? b.timestamp : a.timestamp;
  return out;
}

Pose inverse(const Pose& p) { return p.inverse(); }

Pose relative_pose(const Pose& fixed_frame, const Pose& constrained_frame) {
  Pose fixed_inv = fixed_frame.inverse();
  fixed_inv.timestamp.reset();
  return compose(fixed_inv, constrained_frame);
}

void validate(const Shape& s) {
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, CircleShape>) {
          if (!(g.r > 0.0)) throw Error(ErrorKind::InvalidArgument, "circle radius must be positive: " + s.qualified_name());
        } else if constexpr (std::is_same_v<T, CylinderShape>) {
          if (!(g.r > 0.0) || !(g.h > 0.0))
            throw Error(ErrorKind::InvalidArgument, "cylinder radius and height must be positive: " + s.qualified_name());
        }
      },
      s.geometry);
}

Shape transformed(const Shape& s, const Pose& pose) {
  Shape out = s;
  std::visit(
      [&](auto& g) {
        g.p = pose.apply(g.p);
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, LineShape> || std::is_same_v<T, CylinderShape>) {
          g.a = UnitVec3::normalized(pose.apply_direction(g.a));
        } else if constexpr (std::is_same_v<T, PlaneShape> || std::is_same_v<T, CircleShape>) {
          g.n = UnitVec3::normalized(pose.apply_direction(g.n));
        }
      },
      out.geometry);
  return out;
}

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Point: return "point";
    case ShapeKind::Line: return "line";
    case ShapeKind::Plane: return "plane";
    case ShapeKind::Circle: return "circle";
    case ShapeKind::Cylinder: return "cylinder";
  }
  return "unknown";
}

ShapeKind shape_kind_from_string(const std::string& s) {
  if (s == "point") return ShapeKind::Point;
  if (s == "line") return ShapeKind::Line;
  if (s == "plane") return ShapeKind::Plane;
  if (s == "circle") return ShapeKind::Circle;
  if (s == "cylinder") return ShapeKind::Cylinder;
  throw Error(ErrorKind::Parse, "unknown shape kind '" + s + "'");
}

}  // namespace skillspace
