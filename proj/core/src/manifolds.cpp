#include "skillspace/manifolds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "skillspace/overloaded.hpp"
#include "skillspace/random.hpp"

namespace skillspace {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Unit direction of the component of d orthogonal to n, with the deterministic
// fallback for points on the axis.
Vec3 radial_direction(const Vec3& d, const UnitVec3& n) {
  const Vec3 w = d - d.dot(n.vec()) * n.vec();
  const double len = w.norm();
  if (len < 1e-15) return perpendicular_to(n).vec();
  return w / len;
}

double polar_angle(const Vec3& d, const UnitVec3& n) {
  const auto [e1, e2] = plane_basis(n);
  const Vec3 w = d - d.dot(n.vec()) * n.vec();
  if (w.norm() < 1e-15) return 0.0;
  return std::atan2(w.dot(e2), w.dot(e1));
}

// Angular distance from phi to a (possibly wrapped) angle interval.
double angular_excess(double phi, const Interval& iv) {
  if (iv.width() >= kTwoPi) return 0.0;
  double shifted = std::fmod(phi - iv.lo, kTwoPi);
  if (shifted < 0.0) shifted += kTwoPi;
  if (shifted <= iv.width()) return 0.0;
  return std::min(shifted - iv.width(), kTwoPi - shifted);
}

const Interval& bound_at(const std::optional<ExtentBounds>& b, std::size_t i, const char* what) {
  if (!b || b->dims.size() <= i) {
    throw Error(ErrorKind::UnboundedDomain, std::string("unbounded sample domain: ") + what);
  }
  return b->dims[i];
}

// Rotation offset between the polar reference of `old_axis` mapped by r and
// the polar reference of the mapped axis.
double polar_shift(const UnitVec3& old_axis, const Rotation& r) {
  const UnitVec3 new_axis = UnitVec3::normalized(r * old_axis.vec());
  const Vec3 mapped_e1 = r * plane_basis(old_axis).first;
  const auto [e1, e2] = plane_basis(new_axis);
  return std::atan2(mapped_e1.dot(e2), mapped_e1.dot(e1));
}

Interval shifted(const Interval& iv, double d) { return {iv.lo + d, iv.hi + d}; }

}  // namespace

TranslationType TranslationManifold::type() const {
  return std::visit(Overloaded{
                        [](const Full3Space&) { return TranslationType::Full3Space; },
                        [](const PointManifold&) { return TranslationType::Point; },
                        [](const LineManifold&) { return TranslationType::Line; },
                        [](const CircleManifold&) { return TranslationType::Circle; },
                        [](const PlaneManifold&) { return TranslationType::Plane; },
                        [](const CylinderManifold&) { return TranslationType::Cylinder; },
                    },
                    form);
}

RotationType RotationManifold::type() const {
  return std::visit(Overloaded{
                        [](const FullSO3&) { return RotationType::FullSO3; },
                        [](const OneParallel&) { return RotationType::OneParallel; },
                        [](const OneAngle&) { return RotationType::OneAngle; },
                    },
                    form);
}

std::string to_string(TranslationType t) {
  switch (t) {
    case TranslationType::Point: return "point";
    case TranslationType::Line: return "line";
    case TranslationType::Circle: return "circle";
    case TranslationType::Plane: return "plane";
    case TranslationType::Cylinder: return "cylinder";
    case TranslationType::Full3Space: return "full3space";
  }
  return "?";
}

std::string to_string(RotationType t) {
  switch (t) {
    case RotationType::OneParallel: return "oneparallel";
    case RotationType::OneAngle: return "oneangle";
    case RotationType::FullSO3: return "so3";
  }
  return "?";
}

std::string to_string(AxisSelector s) {
  static constexpr std::array<const char*, 6> names{"+x", "-x", "+y", "-y", "+z", "-z"};
  return names[static_cast<std::size_t>(s)];
}

TranslationType translation_type_from_string(const std::string& s) {
  for (auto t : {TranslationType::Point, TranslationType::Line, TranslationType::Circle, TranslationType::Plane,
                 TranslationType::Cylinder, TranslationType::Full3Space}) {
    if (to_string(t) == s) return t;
  }
  throw Error(ErrorKind::Parse, "unknown translation manifold '" + s + "'");
}

RotationType rotation_type_from_string(const std::string& s) {
  for (auto t : {RotationType::OneParallel, RotationType::OneAngle, RotationType::FullSO3}) {
    if (to_string(t) == s) return t;
  }
  throw Error(ErrorKind::Parse, "unknown rotation manifold '" + s + "'");
}

AxisSelector axis_selector_from_string(const std::string& s) {
  for (int i = 0; i < 6; ++i) {
    const auto sel = static_cast<AxisSelector>(i);
    if (to_string(sel) == s) return sel;
  }
  throw Error(ErrorKind::Parse, "unknown axis selector '" + s + "' (expected one of +x,-x,+y,-y,+z,-z)");
}

int dimension(TranslationType t) {
  switch (t) {
    case TranslationType::Point: return 0;
    case TranslationType::Line:
    case TranslationType::Circle: return 1;
    case TranslationType::Plane:
    case TranslationType::Cylinder: return 2;
    case TranslationType::Full3Space: return 3;
  }
  return 3;
}

int dimension(RotationType t) {
  switch (t) {
    case RotationType::OneParallel: return 1;
    case RotationType::OneAngle: return 2;
    case RotationType::FullSO3: return 3;
  }
  return 3;
}

void validate(const TranslationManifold& m) {
  auto check_unit = [](const UnitVec3& v) { UnitVec3::checked(v.vec()); };
  std::visit(Overloaded{
                 [&](const Full3Space& f) {
                   if (f.slab) {
                     check_unit(f.slab->n);
                     if (f.slab->offset.lo > f.slab->offset.hi)
                       throw Error(ErrorKind::InvalidArgument, "slab interval has lo > hi");
                   }
                 },
                 [](const PointManifold&) {},
                 [&](const LineManifold& l) { check_unit(l.a); },
                 [&](const CircleManifold& c) {
                   check_unit(c.n);
                   if (!(c.r > 0.0)) throw Error(ErrorKind::InvalidArgument, "circle radius must be positive");
                 },
                 [&](const PlaneManifold& p) { check_unit(p.n); },
                 [&](const CylinderManifold& c) {
                   check_unit(c.a);
                   if (!(c.r > 0.0)) throw Error(ErrorKind::InvalidArgument, "cylinder radius must be positive");
                 },
             },
             m.form);
  if (m.bounds) {
    for (const auto& iv : m.bounds->dims) {
      if (!(iv.lo <= iv.hi)) throw Error(ErrorKind::InvalidArgument, "extent bound has lo > hi");
    }
  }
}

void validate(const RotationManifold& m) {
  std::visit(Overloaded{
                 [](const FullSO3&) {},
                 [](const OneParallel& p) { UnitVec3::checked(p.vf.vec()); },
                 [](const OneAngle& a) {
                   UnitVec3::checked(a.vf.vec());
                   if (!(a.theta >= 0.0 && a.theta <= std::numbers::pi))
                     throw Error(ErrorKind::InvalidArgument, "OneAngle theta must lie in [0, pi]");
                   if (a.interval && !(a.interval->lo <= a.interval->hi))
                     throw Error(ErrorKind::InvalidArgument, "OneAngle interval has lo > hi");
                 },
             },
             m.form);
}

Vec3 unit_axis(AxisSelector s) {
  switch (s) {
    case AxisSelector::PosX: return Vec3::UnitX();
    case AxisSelector::NegX: return -Vec3::UnitX();
    case AxisSelector::PosY: return Vec3::UnitY();
    case AxisSelector::NegY: return -Vec3::UnitY();
    case AxisSelector::PosZ: return Vec3::UnitZ();
    case AxisSelector::NegZ: return -Vec3::UnitZ();
  }
  return Vec3::UnitZ();
}

UnitVec3 constrained_axis(const Rotation& r, AxisSelector s) { return UnitVec3::normalized(r * unit_axis(s)); }

std::pair<Vec3, Vec3> plane_basis(const UnitVec3& n) {
  const Vec3 e1 = perpendicular_to(n).vec();
  const Vec3 e2 = n.vec().cross(e1).normalized();
  return {e1, e2};
}

Vec3 project_translation(const TranslationManifold& m, const Vec3& u) {
  return std::visit(Overloaded{
                        [&](const Full3Space&) -> Vec3 { return u; },
                        [&](const PointManifold& p) -> Vec3 { return p.p; },
                        [&](const LineManifold& l) -> Vec3 { return l.p + (u - l.p).dot(l.a.vec()) * l.a.vec(); },
                        [&](const CircleManifold& c) -> Vec3 { return c.p + c.r * radial_direction(u - c.p, c.n); },
                        [&](const PlaneManifold& p) -> Vec3 { return u + (p.p - u).dot(p.n.vec()) * p.n.vec(); },
                        [&](const CylinderManifold& c) -> Vec3 {
                          const Vec3 foot = c.p + (u - c.p).dot(c.a.vec()) * c.a.vec();
                          return foot + c.r * radial_direction(u - c.p, c.a);
                        },
                    },
                    m.form);
}

double dist_t(const TranslationManifold& m, const Vec3& u) { return (project_translation(m, u) - u).norm(); }

Rotation project_rotation(const RotationManifold& m, const Rotation& r) {
  const auto target_of = [&](double alpha) -> std::optional<std::pair<UnitVec3, double>> {
    return std::visit(Overloaded{
                          [](const FullSO3&) -> std::optional<std::pair<UnitVec3, double>> { return std::nullopt; },
                          [](const OneParallel& p) -> std::optional<std::pair<UnitVec3, double>> {
                            return std::pair{p.vf, 0.0};
                          },
                          [&](const OneAngle& a) -> std::optional<std::pair<UnitVec3, double>> {
                            if (a.interval) return std::pair{a.vf, std::clamp(alpha, a.interval->lo, a.interval->hi)};
                            return std::pair{a.vf, a.theta};
                          },
                      },
                      m.form);
  };
  if (m.type() == RotationType::FullSO3) return r;

  const UnitVec3 vf = m.type() == RotationType::OneParallel ? std::get<OneParallel>(m.form).vf
                                                            : std::get<OneAngle>(m.form).vf;
  const UnitVec3 vc = constrained_axis(r, m.selector);
  const double alpha = angle_between(vc, vf);
  const auto target = target_of(alpha);
  const double correction = alpha - target->second;
  if (correction == 0.0) return r;

  const Vec3 c = vc.vec().cross(vf.vec());
  const UnitVec3 axis = c.norm() < 1e-12 ? perpendicular_to(vf) : UnitVec3::normalized(c);
  return rotation_from_axis_angle(axis, correction) * r;
}

double quaternion_distance(const Rotation& a, const Rotation& b) {
  const Eigen::Vector4d qa = a.wxyz(), qb = b.wxyz();
  return std::min((qa - qb).norm(), (qa + qb).norm());
}

double dist_r(const RotationManifold& m, const Rotation& r) { return quaternion_distance(project_rotation(m, r), r); }

double rotation_violation(const RotationManifold& m, const Rotation& r) {
  return std::visit(Overloaded{
                        [](const FullSO3&) { return 0.0; },
                        [&](const OneParallel& p) { return angle_between(constrained_axis(r, m.selector), p.vf); },
                        [&](const OneAngle& a) {
                          const double alpha = angle_between(constrained_axis(r, m.selector), a.vf);
                          return a.interval ? a.interval->excess(alpha) : std::abs(alpha - a.theta);
                        },
                    },
                    m.form);
}

std::vector<double> coordinates(const TranslationManifold& m, const Vec3& u) {
  return std::visit(Overloaded{
                        [&](const Full3Space&) { return std::vector<double>{u.x(), u.y(), u.z()}; },
                        [&](const PointManifold&) { return std::vector<double>{}; },
                        [&](const LineManifold& l) { return std::vector<double>{(u - l.p).dot(l.a.vec())}; },
                        [&](const CircleManifold& c) { return std::vector<double>{polar_angle(u - c.p, c.n)}; },
                        [&](const PlaneManifold& p) {
                          const auto [e1, e2] = plane_basis(p.n);
                          const Vec3 d = u - p.p;
                          return std::vector<double>{d.dot(e1), d.dot(e2)};
                        },
                        [&](const CylinderManifold& c) {
                          return std::vector<double>{(u - c.p).dot(c.a.vec()), polar_angle(u - c.p, c.a)};
                        },
                    },
                    m.form);
}

Vec3 point_at(const TranslationManifold& m, const std::vector<double>& x) {
  const auto need = [&](std::size_t n) {
    if (x.size() < n) throw Error(ErrorKind::InvalidArgument, "too few manifold coordinates");
  };
  return std::visit(Overloaded{
                        [&](const Full3Space&) -> Vec3 {
                          need(3);
                          return {x[0], x[1], x[2]};
                        },
                        [&](const PointManifold& p) -> Vec3 { return p.p; },
                        [&](const LineManifold& l) -> Vec3 {
                          need(1);
                          return l.p + x[0] * l.a.vec();
                        },
                        [&](const CircleManifold& c) -> Vec3 {
                          need(1);
                          const auto [e1, e2] = plane_basis(c.n);
                          return c.p + c.r * (std::cos(x[0]) * e1 + std::sin(x[0]) * e2);
                        },
                        [&](const PlaneManifold& p) -> Vec3 {
                          need(2);
                          const auto [e1, e2] = plane_basis(p.n);
                          return p.p + x[0] * e1 + x[1] * e2;
                        },
                        [&](const CylinderManifold& c) -> Vec3 {
                          need(2);
                          const auto [e1, e2] = plane_basis(c.a);
                          return c.p + x[0] * c.a.vec() + c.r * (std::cos(x[1]) * e1 + std::sin(x[1]) * e2);
                        },
                    },
                    m.form);
}

double bounds_violation(const TranslationManifold& m, const Vec3& u) {
  double slab_excess = 0.0;
  if (const auto* f = std::get_if<Full3Space>(&m.form); f && f->slab) {
    slab_excess = f->slab->offset.excess((u - f->slab->p).dot(f->slab->n.vec()));
  }
  if (!m.bounds || m.bounds->dims.empty()) return slab_excess;

  const auto& dims = m.bounds->dims;
  const std::vector<double> x = coordinates(m, u);
  double sq = 0.0;
  switch (m.type()) {
    case TranslationType::Full3Space:
    case TranslationType::Line:
    case TranslationType::Plane:
      for (std::size_t i = 0; i < dims.size() && i < x.size(); ++i) sq += std::pow(dims[i].excess(x[i]), 2);
      break;
    case TranslationType::Circle:
      sq = std::pow(std::get<CircleManifold>(m.form).r * angular_excess(x[0], dims[0]), 2);
      break;
    case TranslationType::Cylinder: {
      sq = std::pow(dims[0].excess(x[0]), 2);
      if (dims.size() > 1) sq += std::pow(std::get<CylinderManifold>(m.form).r * angular_excess(x[1], dims[1]), 2);
      break;
    }
    case TranslationType::Point: break;
  }
  return std::sqrt(sq) + slab_excess;
}

double dist_t(const NullspaceModel& n, const Pose& p) { return dist_t(n.translation, p.translation); }
double dist_r(const NullspaceModel& n, const Pose& p) { return dist_r(n.rotation, p.rotation); }

TranslationManifold transformed(const TranslationManifold& m, const Pose& pose) {
  TranslationManifold out = m;
  const Rotation& r = pose.rotation;
  const auto dir = [&](const UnitVec3& v) { return UnitVec3::normalized(r * v.vec()); };
  std::optional<double> polar_delta;
  std::visit(Overloaded{
                 [&](Full3Space& f) {
                   if (f.slab) {
                     f.slab->p = pose.apply(f.slab->p);
                     f.slab->n = dir(f.slab->n);
                   }
                 },
                 [&](PointManifold& p) { p.p = pose.apply(p.p); },
                 [&](LineManifold& l) {
                   l.p = pose.apply(l.p);
                   l.a = dir(l.a);
                 },
                 [&](CircleManifold& c) {
                   polar_delta = polar_shift(c.n, r);
                   c.p = pose.apply(c.p);
                   c.n = dir(c.n);
                 },
                 [&](PlaneManifold& p) {
                   polar_delta = polar_shift(p.n, r);
                   p.p = pose.apply(p.p);
                   p.n = dir(p.n);
                 },
                 [&](CylinderManifold& c) {
                   polar_delta = polar_shift(c.a, r);
                   c.p = pose.apply(c.p);
                   c.a = dir(c.a);
                 },
             },
             out.form);

  if (!out.bounds) return out;
  auto& dims = out.bounds->dims;
  switch (out.type()) {
    case TranslationType::Full3Space: {
      if (dims.size() < 3) break;
      Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
      Vec3 hi = -lo;
      for (int corner = 0; corner < 8; ++corner) {
        const Vec3 c{(corner & 1) ? dims[0].hi : dims[0].lo, (corner & 2) ? dims[1].hi : dims[1].lo,
                     (corner & 4) ? dims[2].hi : dims[2].lo};
        const Vec3 w = pose.apply(c);
        lo = lo.cwiseMin(w);
        hi = hi.cwiseMax(w);
      }
      for (int i = 0; i < 3; ++i) dims[i] = {lo[i], hi[i]};
      break;
    }
    case TranslationType::Circle:
      if (!dims.empty()) dims[0] = shifted(dims[0], *polar_delta);
      break;
    case TranslationType::Cylinder:
      if (dims.size() > 1) dims[1] = shifted(dims[1], *polar_delta);
      break;
    case TranslationType::Plane: {
      if (dims.size() < 2 || std::abs(*polar_delta) < 1e-15) break;
      const double c = std::cos(*polar_delta), s = std::sin(*polar_delta);
      double lo1 = INFINITY, hi1 = -INFINITY, lo2 = INFINITY, hi2 = -INFINITY;
      for (double a : {dims[0].lo, dims[0].hi}) {
        for (double b : {dims[1].lo, dims[1].hi}) {
          const double x = c * a - s * b, y = s * a + c * b;
          lo1 = std::min(lo1, x), hi1 = std::max(hi1, x), lo2 = std::min(lo2, y), hi2 = std::max(hi2, y);
        }
      }
      dims[0] = {lo1, hi1};
      dims[1] = {lo2, hi2};
      break;
    }
    default: break;
  }
  return out;
}

RotationManifold transformed(const RotationManifold& m, const Pose& pose) {
  RotationManifold out = m;
  const auto dir = [&](const UnitVec3& v) { return UnitVec3::normalized(pose.rotation * v.vec()); };
  std::visit(Overloaded{
                 [](FullSO3&) {},
                 [&](OneParallel& p) { p.vf = dir(p.vf); },
                 [&](OneAngle& a) { a.vf = dir(a.vf); },
             },
             out.form);
  return out;
}

NullspaceModel transformed(const NullspaceModel& n, const Pose& pose) {
  return {transformed(n.translation, pose), transformed(n.rotation, pose), n.rms_fit_residual};
}

Pose sample_pose(const NullspaceModel& n, const SampleSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  const std::optional<ExtentBounds>& ranges = spec.translation_range ? spec.translation_range : n.translation.bounds;
  const auto draw = [&](const Interval& iv) { return rng.uniform(iv.lo, iv.hi); };
  const auto draw_angle = [&](std::size_t i) {
    if (ranges && ranges->dims.size() > i) return draw(ranges->dims[i]);
    return rng.uniform(-std::numbers::pi, std::numbers::pi);
  };

  Vec3 t;
  switch (n.translation.type()) {
    case TranslationType::Point: t = point_at(n.translation, {}); break;
    case TranslationType::Line: t = point_at(n.translation, {draw(bound_at(ranges, 0, "line parameter"))}); break;
    case TranslationType::Circle: t = point_at(n.translation, {draw_angle(0)}); break;
    case TranslationType::Plane: {
      const double s1 = draw(bound_at(ranges, 0, "plane coordinate 1"));
      const double s2 = draw(bound_at(ranges, 1, "plane coordinate 2"));
      t = point_at(n.translation, {s1, s2});
      break;
    }
    case TranslationType::Cylinder: {
      const double s = draw(bound_at(ranges, 0, "cylinder axial coordinate"));
      t = point_at(n.translation, {s, draw_angle(1)});
      break;
    }
    case TranslationType::Full3Space: {
      const double x = draw(bound_at(ranges, 0, "x"));
      const double y = draw(bound_at(ranges, 1, "y"));
      const double z = draw(bound_at(ranges, 2, "z"));
      t = {x, y, z};
      break;
    }
  }

  const UnitVec3 body_axis = UnitVec3::normalized(unit_axis(n.rotation.selector));
  Rotation r;
  std::visit(Overloaded{
                 [&](const FullSO3&) { r = rng.rotation(); },
                 [&](const OneParallel& p) {
                   const double spin = rng.uniform(-std::numbers::pi, std::numbers::pi);
                   r = rotation_from_axis_angle(p.vf, spin) * rotation_between(body_axis, p.vf);
                 },
                 [&](const OneAngle& a) {
                   double theta = a.theta;
                   if (spec.angle_range) {
                     theta = draw(*spec.angle_range);
                   } else if (a.interval) {
                     theta = draw(*a.interval);
                   }
                   const double azimuth = rng.uniform(-std::numbers::pi, std::numbers::pi);
                   const double spin = rng.uniform(-std::numbers::pi, std::numbers::pi);
                   r = rotation_from_axis_angle(a.vf, azimuth) * rotation_from_axis_angle(perpendicular_to(a.vf), theta) *
                       rotation_between(body_axis, a.vf) * rotation_from_axis_angle(body_axis, spin);
                 },
             },
             n.rotation.form);
  return {t, r, std::nullopt};
}

}  // namespace skillspace
