#pragma once

#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "skillspace/fitting.hpp"
#include "skillspace/manifolds.hpp"

namespace skillspace {

enum class Relation { Distance, Angle, Coincident, Concentric, Parallel };

std::string to_string(Relation r);
Relation relation_from_string(const std::string& s);

/// Names a shape in a scene ("object/name") and its kind.
struct ShapeRef {
  std::string object;
  std::string name;
  ShapeKind kind = ShapeKind::Point;

  std::string qualified_name() const { return object + "/" + name; }
  bool operator==(const ShapeRef&) const = default;
};

/// Relation between a fixed scene shape and a shape attached to the
/// constrained frame. Constrained shapes sit at the constrained frame origin;
/// their direction (line axis, plane normal, cylinder axis) is the selected
/// body axis.
///
/// Values: meters for Distance, radians for Angle. An interval replaces the
/// scalar value for bounded relations. Concentric with a fixed cylinder may
/// carry a radial standoff as its value. Plane-Line angles are measured
/// between the line and the plane normal.
struct GeometricConstraint {
  ShapeRef fixed;
  ShapeRef constrained;
  Relation relation = Relation::Coincident;
  std::optional<double> value;
  std::optional<Interval> interval;
};

std::string to_string(const GeometricConstraint& c);

/// True when the (fixed kind, constrained kind, relation, value form) row is
/// supported.
bool supported(const GeometricConstraint& c);

struct SceneObject {
  std::string name;
  Pose pose;                  // object frame in world
  std::vector<Shape> shapes;  // in the object frame
};

struct Scene {
  std::vector<SceneObject> objects;

  const SceneObject& object(const std::string& name) const;
  bool has_object(const std::string& name) const;
  /// Shape mapped into world coordinates. Throws InvalidArgument when missing.
  Shape world_shape(const ShapeRef& ref) const;
  /// Every shape in world coordinates, in scene order.
  std::vector<Shape> world_shapes() const;
};

/// Throws InvalidArgument on duplicate names or invalid shapes.
void validate(const Scene& s);

/// Nullspace (world frame) of the relative poses satisfying `c`.
/// Throws Unsupported for unsupported combinations.
NullspaceModel constraint_nullspace(const GeometricConstraint& c, const Scene& scene,
                                    AxisSelector selector = AxisSelector::PosZ);

/// Intersection of two nullspaces. Throws Unsupported when the pair has no
/// closed-form intersection.
/// `tolerance` applies to coincidence tests (meters and radians); the
/// parameters of the more restrictive operand are kept.
NullspaceModel intersect(const NullspaceModel& a, const NullspaceModel& b, double tolerance = 1e-9);
/// Intersection of every constraint's nullspace, in world frame.
NullspaceModel combined_nullspace(const std::vector<GeometricConstraint>& cs, const Scene& scene,
                                  AxisSelector selector = AxisSelector::PosZ, double tolerance = 1e-9);

struct MatchOptions {
  double position_tolerance = 0.01;
  double angle_tolerance = 5.0 * std::numbers::pi / 180.0;
  std::string fixed_object;        // preferred owner of fixed shapes
  std::string constrained_object;  // label used for constrained shape refs
};

/// Normalized mismatch between two nullspaces of the same manifold types:
/// max over parameters of error / tolerance. Bounds are ignored. Empty when
/// the types differ.
std::optional<double> manifold_distance(const NullspaceModel& a, const NullspaceModel& b, const MatchOptions& opt);

struct ConstraintHypothesis {
  std::vector<GeometricConstraint> constraints;
  double distance = 0.0;  // manifold_distance of the combined nullspace
};

/// Constraint sets over scene shapes whose combined nullspace matches `n`
/// (world frame), best first. Empty when nothing matches.
std::vector<ConstraintHypothesis> map_to_constraints(const NullspaceModel& n, const Scene& scene,
                                                     const MatchOptions& opt = {});

/// Violation (>= 0) of `c` by a constrained frame at world pose `ee`.
double constraint_residual(const GeometricConstraint& c, const Pose& ee, const Scene& scene,
                           AxisSelector selector = AxisSelector::PosZ);

struct TrajectorySpec {
  std::string parameter;       // "line", "circle" or "angle"
  std::vector<double> values;  // waypoint parameters in execution order
};

struct SkillModel {
  std::string name;
  DemonstrationKind kind = DemonstrationKind::Discrete;
  std::string fixed_object;
  std::string constrained_object;
  std::vector<GeometricConstraint> constraints;
  NullspaceModel nullspace;  // in the fixed object's frame
  std::optional<TrajectorySpec> trajectory;
  std::map<std::string, double> parameters;
  Scene scene;  // scene the constraints refer to
};

/// The default desk scene: a table with a pull path and a cup.
Scene default_scene();

std::vector<std::string> skill_names();
std::map<std::string, double> default_parameters(const std::string& skill);

/// Parameterized skill. `params` override the defaults; the template writes
/// the cup dimensions into its copy of the scene. Throws InvalidArgument for
/// unknown skills/parameters or invalid values and when a shape is missing.
SkillModel skill_template(const std::string& name, const Scene& scene, const std::map<std::string, double>& params = {});

/// Skill rebuilt with one parameter changed.
SkillModel edit_parameter(const SkillModel& s, const std::string& param, double value);

/// True when the nullspace matches the one re-derived from the constraints.
/// Bounds are compared only where the constraints imply them.
bool consistent(const SkillModel& s, double tolerance = 1e-9);

}  // namespace skillspace
