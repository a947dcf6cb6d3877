#include <algorithm>
#include <cmath>

#include "skillspace/constraints.hpp"

namespace skillspace {

namespace {

constexpr double kPi = std::numbers::pi;

Shape shape(const std::string& owner, const std::string& name, ShapeGeometry g) { return Shape{owner, name, std::move(g)}; }

ShapeRef ref(const std::string& object, const std::string& name, ShapeKind kind) { return {object, name, kind}; }

// Constrained shapes are named after their kind.
ShapeRef held(const std::string& object, ShapeKind kind) { return {object, to_string(kind), kind}; }

GeometricConstraint constraint(ShapeRef fixed, ShapeRef constrained, Relation r, std::optional<double> value = {},
                               std::optional<Interval> interval = {}) {
  return {std::move(fixed), std::move(constrained), r, value, interval};
}

Shape* find_shape(Scene& scene, const std::string& object, const std::string& name) {
  for (auto& o : scene.objects) {
    if (o.name != object) continue;
    for (auto& s : o.shapes)
      if (s.name == name) return &s;
  }
  throw Error(ErrorKind::InvalidArgument, "scene lacks shape '" + object + "/" + name + "'");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, "invalid parameter: " + what);
}

int waypoint_count(double v) {
  require(v >= 2.0 && std::floor(v) == v && v <= 100000.0, "waypoints must be an integer >= 2");
  return static_cast<int>(v);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return out;
}

const std::map<std::string, std::map<std::string, double>>& defaults() {
  static const std::map<std::string, std::map<std::string, double>> table{
      {"grasp", {{"radius", 0.035}, {"height", 0.1}, {"standoff", 0.0}}},
      {"place", {{"distance", 0.0}}},
      {"move", {{"angle", 0.0}}},
      {"pull", {{"theta_min", 0.2}, {"theta_max", 0.6}, {"start", 0.0}, {"end", 0.2}, {"waypoints", 10.0}}},
      {"mix", {{"radius", 0.02}, {"waypoints", 36.0}}},
      {"pour", {{"theta_end", 1.2}, {"waypoints", 13.0}}},
  };
  return table;
}

// Workspace of the free placement skills, in table coordinates.
constexpr Interval kWorkX{0.3, 0.6};
constexpr Interval kWorkY{-0.3, 0.3};
constexpr Interval kWorkZ{0.1, 0.3};

}  // namespace

Scene default_scene() {
  Scene s;
  SceneObject table{"table", Pose::identity(), {}};
  table.shapes.push_back(shape("table", "top", PlaneShape{Vec3::Zero(), UnitVec3()}));
  table.shapes.push_back(
      shape("table", "pull-path", LineShape{Vec3(0.55, 0.15, 0.05), UnitVec3::checked(Vec3(-1.0, 0.0, 0.0))}));
  s.objects.push_back(std::move(table));

  SceneObject cup{"cup", Pose::from_translation(Vec3(0.45, -0.15, 0.0)), {}};
  cup.shapes.push_back(shape("cup", "body", CylinderShape{Vec3(0.0, 0.0, 0.05), UnitVec3(), 0.035, 0.1}));
  cup.shapes.push_back(shape("cup", "axis", LineShape{Vec3::Zero(), UnitVec3()}));
  cup.shapes.push_back(shape("cup", "bottom", PlaneShape{Vec3::Zero(), UnitVec3()}));
  cup.shapes.push_back(shape("cup", "mid", PlaneShape{Vec3(0.0, 0.0, 0.05), UnitVec3()}));
  cup.shapes.push_back(shape("cup", "mix-path", CircleShape{Vec3(0.0, 0.0, 0.06), UnitVec3(), 0.02}));
  cup.shapes.push_back(shape("cup", "pour-point", PointShape{Vec3(0.0, 0.0, 0.15)}));
  s.objects.push_back(std::move(cup));
  return s;
}

std::vector<std::string> skill_names() { return {"grasp", "place", "move", "pull", "mix", "pour"}; }

std::map<std::string, double> default_parameters(const std::string& skill) {
  const auto it = defaults().find(skill);
  if (it == defaults().end()) throw Error(ErrorKind::InvalidArgument, "unknown skill '" + skill + "'");
  return it->second;
}

SkillModel skill_template(const std::string& name, const Scene& scene, const std::map<std::string, double>& params) {
  SkillModel s;
  s.name = name;
  s.parameters = default_parameters(name);
  for (const auto& [k, v] : params) {
    if (!s.parameters.count(k)) throw Error(ErrorKind::InvalidArgument, "unknown parameter '" + k + "' for " + name);
    require(std::isfinite(v), k + " must be finite");
    s.parameters[k] = v;
  }
  s.scene = scene;
  const auto& p = s.parameters;
  std::optional<ExtentBounds> extra_bounds;

  if (name == "grasp") {
    const double r = p.at("radius"), h = p.at("height"), standoff = p.at("standoff");
    require(r > 0.0, "radius must be positive");
    require(h > 0.0, "height must be positive");
    require(r + standoff > 0.0, "radius + standoff must be positive");
    auto& body = std::get<CylinderShape>(find_shape(s.scene, "cup", "body")->geometry);
    body.r = r;
    body.h = h;
    body.p = body.a.vec() * (h / 2.0);
    auto& mid = std::get<PlaneShape>(find_shape(s.scene, "cup", "mid")->geometry);
    mid.p = mid.n.vec() * (h / 2.0);
    s.fixed_object = "cup";
    s.constrained_object = "gripper";
    s.constraints = {
        constraint(ref("cup", "body", ShapeKind::Cylinder), held("gripper", ShapeKind::Cylinder), Relation::Concentric,
                   standoff != 0.0 ? std::optional<double>(standoff) : std::nullopt),
        constraint(ref("cup", "mid", ShapeKind::Plane), held("gripper", ShapeKind::Plane), Relation::Distance, {},
                   Interval{-h / 2.0, h / 2.0}),
    };
  } else if (name == "place") {
    const double d = p.at("distance");
    s.fixed_object = "table";
    s.constrained_object = "cup";
    s.constraints = {d == 0.0 ? constraint(ref("table", "top", ShapeKind::Plane), held("cup", ShapeKind::Plane),
                                           Relation::Coincident)
                              : constraint(ref("table", "top", ShapeKind::Plane), held("cup", ShapeKind::Plane),
                                           Relation::Distance, d)};
    extra_bounds = ExtentBounds{{kWorkX, kWorkY}};
  } else if (name == "move") {
    const double a = p.at("angle");
    require(a >= 0.0 && a <= kPi, "angle must lie in [0, pi]");
    s.fixed_object = "table";
    s.constrained_object = "cup";
    s.constraints = {a == 0.0 ? constraint(ref("table", "top", ShapeKind::Plane), held("cup", ShapeKind::Plane),
                                           Relation::Parallel)
                              : constraint(ref("table", "top", ShapeKind::Plane), held("cup", ShapeKind::Plane),
                                           Relation::Angle, a)};
    extra_bounds = ExtentBounds{{kWorkX, kWorkY, kWorkZ}};
  } else if (name == "pull") {
    const double lo = p.at("theta_min"), hi = p.at("theta_max");
    require(lo >= 0.0 && lo <= hi && hi <= kPi, "need 0 <= theta_min <= theta_max <= pi");
    require(p.at("start") != p.at("end"), "start and end must differ");
    const int n = waypoint_count(p.at("waypoints"));
    s.kind = DemonstrationKind::Continuous;
    s.fixed_object = "table";
    s.constrained_object = "gripper";
    s.constraints = {
        constraint(ref("table", "pull-path", ShapeKind::Line), held("gripper", ShapeKind::Point), Relation::Coincident),
        constraint(ref("table", "top", ShapeKind::Plane), held("gripper", ShapeKind::Line), Relation::Angle, {},
                   Interval{lo, hi}),
    };
    extra_bounds = ExtentBounds{{{std::min(p.at("start"), p.at("end")), std::max(p.at("start"), p.at("end"))}}};
    s.trajectory = TrajectorySpec{"line", linspace(p.at("start"), p.at("end"), n)};
  } else if (name == "mix") {
    const double r = p.at("radius");
    require(r > 0.0, "radius must be positive");
    const int n = waypoint_count(p.at("waypoints"));
    std::get<CircleShape>(find_shape(s.scene, "cup", "mix-path")->geometry).r = r;
    s.kind = DemonstrationKind::Continuous;
    s.fixed_object = "cup";
    s.constrained_object = "spoon";
    s.constraints = {
        constraint(ref("cup", "mix-path", ShapeKind::Circle), held("spoon", ShapeKind::Point), Relation::Coincident),
        constraint(ref("cup", "axis", ShapeKind::Line), held("spoon", ShapeKind::Line), Relation::Distance, r),
    };
    extra_bounds = ExtentBounds{{{-kPi, kPi}}};
    std::vector<double> phi(n);
    for (int i = 0; i < n; ++i) phi[i] = -kPi + 2.0 * kPi * i / n;
    s.trajectory = TrajectorySpec{"circle", phi};
  } else if (name == "pour") {
    const double end = p.at("theta_end");
    require(end > 0.0 && end <= kPi, "theta_end must lie in (0, pi]");
    const int n = waypoint_count(p.at("waypoints"));
    s.kind = DemonstrationKind::Continuous;
    s.fixed_object = "cup";
    s.constrained_object = "bottle";
    s.constraints = {
        constraint(ref("cup", "pour-point", ShapeKind::Point), held("bottle", ShapeKind::Point), Relation::Coincident),
        constraint(ref("cup", "axis", ShapeKind::Line), held("bottle", ShapeKind::Line), Relation::Angle, {},
                   Interval{0.0, end}),
    };
    s.trajectory = TrajectorySpec{"angle", linspace(0.0, end, n)};
  }

  validate(s.scene);
  const NullspaceModel world = combined_nullspace(s.constraints, s.scene);
  s.nullspace = transformed(world, s.scene.object(s.fixed_object).pose.inverse());
  if (extra_bounds) s.nullspace.translation.bounds = extra_bounds;
  validate(s.nullspace.translation);
  validate(s.nullspace.rotation);
  return s;
}

SkillModel edit_parameter(const SkillModel& s, const std::string& param, double value) {
  if (!s.parameters.count(param)) throw Error(ErrorKind::InvalidArgument, "unknown parameter '" + param + "'");
  std::map<std::string, double> params = s.parameters;
  params[param] = value;
  return skill_template(s.name, s.scene, params);
}

bool consistent(const SkillModel& s, double tolerance) {
  NullspaceModel derived;
  try {
    derived = transformed(combined_nullspace(s.constraints, s.scene, s.nullspace.rotation.selector),
                          s.scene.object(s.fixed_object).pose.inverse());
  } catch (const Error&) {
    return false;
  }
  const auto d = manifold_distance(derived, s.nullspace, MatchOptions{tolerance, tolerance, {}, {}});
  if (!d || *d > 1.0) return false;
  if (!derived.translation.bounds) return true;
  if (!s.nullspace.translation.bounds) return false;
  const auto& a = derived.translation.bounds->dims;
  const auto& b = s.nullspace.translation.bounds->dims;
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i].lo - b[i].lo) > tolerance || std::abs(a[i].hi - b[i].hi) > tolerance) return false;
  }
  return true;
}

}  // namespace skillspace
