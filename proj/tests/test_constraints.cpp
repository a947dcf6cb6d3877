#include <gtest/gtest.h>

#include "support.hpp"

using namespace skillspace;
using namespace skillspace::testing;

namespace {

const UnitVec3 kX = UnitVec3::checked(Vec3::UnitX());
const UnitVec3 kZ = UnitVec3::checked(Vec3::UnitZ());

Scene single(Shape s, Pose pose = Pose::identity()) {
  Scene scene;
  scene.objects.push_back({"fixed", pose, {std::move(s)}});
  return scene;
}

GeometricConstraint make(ShapeKind fixed, ShapeKind held, Relation r, std::optional<double> value = {},
                         std::optional<Interval> interval = {}) {
  return {{"fixed", "s", fixed}, {"tool", to_string(held), held}, r, value, interval};
}

Pose tilted(double angle) { return {Vec3::Zero(), rotation_from_axis_angle(kX, angle), std::nullopt}; }

}  // namespace

// ---- constraint -> nullspace -------------------------------------------------------

TEST(ConstraintNullspace, CoincidentPlanes) {
  const Scene scene = single({"fixed", "s", PlaneShape{Vec3::Zero(), kZ}});
  const NullspaceModel n = constraint_nullspace(make(ShapeKind::Plane, ShapeKind::Plane, Relation::Coincident), scene);
  const auto& pl = std::get<PlaneManifold>(n.translation.form);
  EXPECT_LE(axis_error(pl.n, Vec3::UnitZ()), 1e-15);
  EXPECT_EQ(pl.p.dot(pl.n.vec()), 0.0);
  EXPECT_LE(angle_between(std::get<OneParallel>(n.rotation.form).vf, Vec3::UnitZ()), 1e-15);
}

TEST(ConstraintNullspace, LinesAtDistanceGiveCylinder) {
  const Scene scene = single({"fixed", "s", LineShape{Vec3(0.1, 0, 0), kZ}});
  const NullspaceModel n =
      constraint_nullspace(make(ShapeKind::Line, ShapeKind::Line, Relation::Distance, 0.04), scene);
  const auto& c = std::get<CylinderManifold>(n.translation.form);
  EXPECT_DOUBLE_EQ(c.r, 0.04);
  EXPECT_LE(axis_error(c.a, Vec3::UnitZ()), 1e-15);
  EXPECT_LE(line_offset(c.p, Vec3(0.1, 0, 0), Vec3::UnitZ()), 1e-15);
  EXPECT_EQ(n.rotation.type(), RotationType::OneParallel);
}

TEST(ConstraintNullspace, ConcentricCylindersWithStandoff) {
  const Scene scene = single({"fixed", "s", CylinderShape{Vec3::Zero(), kZ, 0.035, 0.1}});
  const auto c = make(ShapeKind::Cylinder, ShapeKind::Cylinder, Relation::Concentric);
  EXPECT_DOUBLE_EQ(std::get<CylinderManifold>(constraint_nullspace(c, scene).translation.form).r, 0.035);
  auto with = c;
  with.value = 0.01;
  EXPECT_DOUBLE_EQ(std::get<CylinderManifold>(constraint_nullspace(with, scene).translation.form).r, 0.045);
}

TEST(ConstraintNullspace, ParallelPlanesLeaveTranslationFree) {
  const Scene scene = single({"fixed", "s", PlaneShape{Vec3::Zero(), kZ}});
  const NullspaceModel n = constraint_nullspace(make(ShapeKind::Plane, ShapeKind::Plane, Relation::Parallel), scene);
  EXPECT_EQ(n.translation.type(), TranslationType::Full3Space);
  EXPECT_EQ(n.rotation.type(), RotationType::OneParallel);
}

TEST(ConstraintNullspace, PointDistanceRows) {
  const Scene plane = single({"fixed", "s", PlaneShape{Vec3::Zero(), kZ}});
  const NullspaceModel a = constraint_nullspace(make(ShapeKind::Plane, ShapeKind::Point, Relation::Distance, 0.1), plane);
  EXPECT_EQ(a.translation.type(), TranslationType::Plane);
  EXPECT_EQ(a.rotation.type(), RotationType::FullSO3);
  EXPECT_NEAR(std::get<PlaneManifold>(a.translation.form).p.z(), 0.1, 1e-15);

  const Scene line = single({"fixed", "s", LineShape{Vec3::Zero(), kZ}});
  const NullspaceModel b = constraint_nullspace(make(ShapeKind::Line, ShapeKind::Point, Relation::Distance, 0.2), line);
  EXPECT_EQ(b.translation.type(), TranslationType::Cylinder);
  EXPECT_EQ(b.rotation.type(), RotationType::FullSO3);
}

TEST(ConstraintNullspace, IntervalDistanceGivesBounds) {
  const Scene scene = single({"fixed", "s", PlaneShape{Vec3(0, 0, 0.05), kZ}});
  const NullspaceModel n = constraint_nullspace(
      make(ShapeKind::Plane, ShapeKind::Plane, Relation::Distance, {}, Interval{-0.05, 0.05}), scene);
  EXPECT_EQ(n.translation.type(), TranslationType::Full3Space);
  const auto& slab = std::get<Full3Space>(n.translation.form).slab;
  ASSERT_TRUE(slab);
  EXPECT_EQ(slab->offset, (Interval{-0.05, 0.05}));
  EXPECT_EQ(bounds_violation(n.translation, {1, 2, 0.09}), 0.0);
  EXPECT_NEAR(bounds_violation(n.translation, {1, 2, 0.12}), 0.02, 1e-15);
}

TEST(ConstraintNullspace, FollowsObjectPose) {
  const Pose pose{Vec3(0.2, 0.3, 0.4), rotation_from_axis_angle(kX, kPi / 2), std::nullopt};
  const Scene scene = single({"fixed", "s", PlaneShape{Vec3::Zero(), kZ}}, pose);
  const NullspaceModel n = constraint_nullspace(make(ShapeKind::Plane, ShapeKind::Plane, Relation::Coincident), scene);
  EXPECT_LE(axis_error(std::get<PlaneManifold>(n.translation.form).n, Vec3(0, -1, 0)), 1e-12);
}

TEST(ConstraintNullspace, UnsupportedRow) {
  const Scene scene = single({"fixed", "s", CircleShape{Vec3::Zero(), kZ, 0.1}});
  try {
    constraint_nullspace(make(ShapeKind::Circle, ShapeKind::Cylinder, Relation::Concentric), scene);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Unsupported);
    EXPECT_NE(std::string(e.what()).find("unsupported shape/relation combination"), std::string::npos);
  }
}

TEST(Supported, ValueForms) {
  EXPECT_TRUE(supported(make(ShapeKind::Plane, ShapeKind::Plane, Relation::Coincident)));
  EXPECT_FALSE(supported(make(ShapeKind::Plane, ShapeKind::Plane, Relation::Coincident, 0.1)));
  EXPECT_FALSE(supported(make(ShapeKind::Plane, ShapeKind::Plane, Relation::Parallel, 0.1)));
  EXPECT_TRUE(supported(make(ShapeKind::Plane, ShapeKind::Plane, Relation::Distance, 0.1)));
  EXPECT_TRUE(supported(make(ShapeKind::Plane, ShapeKind::Plane, Relation::Angle, 0.3)));
  EXPECT_FALSE(supported(make(ShapeKind::Plane, ShapeKind::Plane, Relation::Distance)));
}

// ---- intersection ------------------------------------------------------------------

TEST(Intersect, CylinderAndSlabKeepCylinderWithAxialBounds) {
  const Scene scene = default_scene();
  const SkillModel g = skill_template("grasp", scene);
  const NullspaceModel world = combined_nullspace(g.constraints, g.scene);
  EXPECT_EQ(world.translation.type(), TranslationType::Cylinder);
  ASSERT_TRUE(world.translation.bounds);
  EXPECT_NEAR(world.translation.bounds->dims[0].width(), 0.1, 1e-12);
}

TEST(Intersect, IncompatiblePairIsUnsupported) {
  const auto a = model(translation(PlaneManifold{Vec3::Zero(), kZ}), rotation(FullSO3{}));
  const auto b = model(translation(PlaneManifold{Vec3::Zero(), kX}), rotation(FullSO3{}));
  EXPECT_THROW(intersect(a, b), Error);
  const auto c = intersect(a, model(translation(Full3Space{}), rotation(OneParallel{kZ})));
  EXPECT_EQ(c.translation.type(), TranslationType::Plane);
  EXPECT_EQ(c.rotation.type(), RotationType::OneParallel);
}

// ---- nullspace -> constraints -------------------------------------------------------

TEST(MapToConstraints, PlaceOnTable) {
  const Scene scene = default_scene();
  const auto fitted = model(translation(PlaneManifold{Vec3(0.4, 0.1, 0.0005), UnitVec3::normalized(Vec3(0.001, 0, 1))}),
                            rotation(OneParallel{UnitVec3::normalized(Vec3(0, 0.002, 1))}));
  MatchOptions opt;
  opt.constrained_object = "cup";
  const auto hs = map_to_constraints(fitted, scene, opt);
  ASSERT_FALSE(hs.empty());
  ASSERT_EQ(hs[0].constraints.size(), 1u);
  const auto& c = hs[0].constraints[0];
  EXPECT_EQ(c.fixed, (ShapeRef{"table", "top", ShapeKind::Plane}));
  EXPECT_EQ(c.constrained.kind, ShapeKind::Plane);
  EXPECT_EQ(canonical(c).relation, Relation::Coincident);
  for (const auto& h : hs) EXPECT_LE(h.distance, 1.0);
}

TEST(MapToConstraints, GraspCylinder) {
  const Scene scene = default_scene();
  const SkillModel g = skill_template("grasp", scene);
  const Pose cup = scene.object("cup").pose;
  MatchOptions opt;
  opt.fixed_object = "cup";
  opt.constrained_object = "gripper";
  const auto hs = map_to_constraints(transformed(g.nullspace, cup), scene, opt);
  ASSERT_FALSE(hs.empty());
  const auto& got = hs[0].constraints;
  ASSERT_EQ(got.size(), 2u);
  for (const auto& want : g.constraints) {
    const bool found = std::any_of(got.begin(), got.end(), [&](const auto& c) {
      return same_relation(c, want) && value_gap(c, want) <= 1e-9;
    });
    EXPECT_TRUE(found) << to_string(want);
  }
}

TEST(MapToConstraints, NoMatchIsEmpty) {
  const auto far = model(translation(PointManifold{Vec3(5, 5, 5)}), rotation(OneParallel{kX}));
  EXPECT_TRUE(map_to_constraints(far, default_scene()).empty());
}

TEST(MapToConstraints, RoundTripWithinTolerance) {
  const Scene scene = single({"fixed", "s", LineShape{Vec3(0.1, 0.2, 0.3), UnitVec3::normalized(Vec3(1, 2, 3))}},
                             Pose{Vec3(0.1, 0, 0), rotation_from_vector(Vec3(0.3, -0.2, 0.1)), std::nullopt});
  const auto c = make(ShapeKind::Line, ShapeKind::Point, Relation::Distance, 0.07);
  NullspaceModel n = constraint_nullspace(c, scene);
  // perturb below the matching tolerance
  std::get<CylinderManifold>(n.translation.form).r += 0.004;
  MatchOptions opt;
  opt.constrained_object = "tool";
  const auto hs = map_to_constraints(n, scene, opt);
  ASSERT_FALSE(hs.empty());
  EXPECT_TRUE(same_relation(hs[0].constraints[0], c));
  EXPECT_NEAR(*hs[0].constraints[0].value, 0.074, 1e-12);
}

TEST(ManifoldDistance, DifferentTypesHaveNoDistance) {
  const auto a = model(translation(PointManifold{}), rotation(FullSO3{}));
  const auto b = model(translation(LineManifold{}), rotation(FullSO3{}));
  EXPECT_FALSE(manifold_distance(a, b, {}));
  EXPECT_EQ(*manifold_distance(a, a, {}), 0.0);
}

// ---- residuals ----------------------------------------------------------------------

TEST(ConstraintResidual, Examples) {
  const Scene scene = default_scene();
  const auto place = skill_template("place", scene).constraints[0];
  EXPECT_EQ(constraint_residual(place, Pose::from_translation({0.4, 0.1, 0.0}), scene), 0.0);
  EXPECT_NEAR(constraint_residual(place, Pose::from_translation({0.4, 0.1, 0.03}), scene), 0.03, 1e-15);

  const auto slab = make(ShapeKind::Plane, ShapeKind::Plane, Relation::Distance, {}, Interval{-0.05, 0.05});
  const Scene plane = single({"fixed", "s", PlaneShape{Vec3::Zero(), kZ}});
  EXPECT_NEAR(constraint_residual(slab, Pose::from_translation({0, 0, 0.07}), plane), 0.02, 1e-15);
  EXPECT_EQ(constraint_residual(slab, Pose::from_translation({0, 0, 0.03}), plane), 0.0);

  const auto angle = make(ShapeKind::Plane, ShapeKind::Plane, Relation::Angle, kPi / 2);
  EXPECT_NEAR(constraint_residual(angle, tilted(kPi / 3), plane), kPi / 6, 1e-12);
}

TEST(ConstraintResidual, ZeroOnSampledNullspace) {
  const Scene scene = default_scene();
  for (const auto& name : skill_names()) {
    const SkillModel s = skill_template(name, scene);
    const Pose fixed = s.scene.object(s.fixed_object).pose;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const Pose ee = compose(fixed, sample_pose(s.nullspace, {}, seed));
      for (const auto& c : s.constraints)
        EXPECT_LE(constraint_residual(c, ee, s.scene, s.nullspace.rotation.selector), 1e-9) << name << " " << to_string(c);
    }
  }
}

// ---- templates ------------------------------------------------------------------------

TEST(SkillTemplate, Grasp) {
  const SkillModel g = skill_template("grasp", default_scene());
  const auto& c = std::get<CylinderManifold>(g.nullspace.translation.form);
  EXPECT_DOUBLE_EQ(c.r, 0.035);
  EXPECT_EQ(g.nullspace.rotation.type(), RotationType::OneParallel);
  EXPECT_LE(axis_error(std::get<OneParallel>(g.nullspace.rotation.form).vf, c.a), 1e-15);
  ASSERT_TRUE(g.nullspace.translation.bounds);
  EXPECT_NEAR(g.nullspace.translation.bounds->dims[0].lo, -0.05, 1e-15);
  EXPECT_NEAR(g.nullspace.translation.bounds->dims[0].hi, 0.05, 1e-15);
  EXPECT_EQ(g.kind, DemonstrationKind::Discrete);
}

TEST(SkillTemplate, Pour) {
  const SkillModel p = skill_template("pour", default_scene());
  EXPECT_EQ(p.nullspace.translation.type(), TranslationType::Point);
  const auto& a = std::get<OneAngle>(p.nullspace.rotation.form);
  ASSERT_TRUE(a.interval);
  EXPECT_EQ(*a.interval, (Interval{0.0, 1.2}));
  EXPECT_EQ(p.kind, DemonstrationKind::Continuous);
  EXPECT_EQ(p.trajectory->values.size(), 13u);
}

TEST(SkillTemplate, Mix) {
  const SkillModel m = skill_template("mix", default_scene());
  EXPECT_DOUBLE_EQ(std::get<CircleManifold>(m.nullspace.translation.form).r, 0.02);
  EXPECT_EQ(m.nullspace.rotation.type(), RotationType::OneParallel);
  EXPECT_EQ(m.trajectory->values.size(), 36u);
}

TEST(SkillTemplate, RelationSets) {
  const Scene scene = default_scene();
  const auto rel = [&](const std::string& n) {
    std::vector<Relation> out;
    for (const auto& c : skill_template(n, scene).constraints) out.push_back(c.relation);
    return out;
  };
  EXPECT_EQ(rel("grasp"), (std::vector<Relation>{Relation::Concentric, Relation::Distance}));
  EXPECT_EQ(rel("place"), (std::vector<Relation>{Relation::Coincident}));
  EXPECT_EQ(rel("move"), (std::vector<Relation>{Relation::Parallel}));
  EXPECT_EQ(rel("pull"), (std::vector<Relation>{Relation::Coincident, Relation::Angle}));
  EXPECT_EQ(rel("mix"), (std::vector<Relation>{Relation::Coincident, Relation::Distance}));
  EXPECT_EQ(rel("pour"), (std::vector<Relation>{Relation::Coincident, Relation::Angle}));
  EXPECT_EQ(skill_template("move", scene).nullspace.translation.type(), TranslationType::Full3Space);
  EXPECT_EQ(skill_template("pull", scene).nullspace.translation.type(), TranslationType::Line);
}

TEST(SkillTemplate, AllConsistent) {
  for (const auto& name : skill_names()) EXPECT_TRUE(consistent(skill_template(name, default_scene()))) << name;
}

TEST(SkillTemplate, Errors) {
  EXPECT_THROW(skill_template("juggle", default_scene()), Error);
  EXPECT_THROW(skill_template("grasp", default_scene(), {{"colour", 1.0}}), Error);
  Scene bare;
  bare.objects.push_back({"table", Pose::identity(), {}});
  EXPECT_THROW(skill_template("place", bare), Error);
}

// ---- editing ---------------------------------------------------------------------------

TEST(EditParameter, GraspRadius) {
  const SkillModel g = skill_template("grasp", default_scene(), {{"radius", 0.04}});
  EXPECT_DOUBLE_EQ(std::get<CylinderManifold>(g.nullspace.translation.form).r, 0.04);
  const SkillModel e = edit_parameter(g, "radius", 0.06);
  EXPECT_DOUBLE_EQ(std::get<CylinderManifold>(e.nullspace.translation.form).r, 0.06);
  EXPECT_TRUE(consistent(e));
}

TEST(EditParameter, GraspHeight) {
  const SkillModel e = edit_parameter(skill_template("grasp", default_scene()), "height", 0.15);
  const auto& d = e.constraints[1];
  ASSERT_TRUE(d.interval);
  EXPECT_DOUBLE_EQ(d.interval->lo, -0.075);
  EXPECT_DOUBLE_EQ(d.interval->hi, 0.075);
  EXPECT_NEAR(e.nullspace.translation.bounds->dims[0].lo, -0.075, 1e-15);
  EXPECT_TRUE(consistent(e));
}

TEST(EditParameter, InvalidValues) {
  const SkillModel g = skill_template("grasp", default_scene());
  EXPECT_THROW(edit_parameter(g, "radius", -0.01), Error);
  EXPECT_THROW(edit_parameter(g, "depth", 0.1), Error);
  EXPECT_THROW(edit_parameter(skill_template("pour", default_scene()), "theta_end", 4.0), Error);
}

TEST(EditParameter, KeepsConsistencyForEverySkill) {
  const Scene scene = default_scene();
  for (const auto& name : skill_names()) {
    const SkillModel s = skill_template(name, scene);
    for (const auto& [k, v] : s.parameters) {
      double nv = v == 0.0 ? 0.1 : v * 1.1;
      if (k == "waypoints") nv = v + 2;
      if (k == "angle" || k == "theta_max") nv = std::min(nv, kPi);
      if (k == "theta_min") nv = std::min(nv, s.parameters.at("theta_max"));
      EXPECT_TRUE(consistent(edit_parameter(s, k, nv))) << name << "." << k;
    }
  }
}

TEST(SceneType, Validation) {
  Scene s = default_scene();
  EXPECT_NO_THROW(validate(s));
  s.objects.push_back(s.objects.front());
  EXPECT_THROW(validate(s), Error);
  EXPECT_THROW(default_scene().world_shape({"cup", "lid", ShapeKind::Plane}), Error);
  EXPECT_EQ(default_scene().world_shapes().size(), 8u);
}

TEST(Names, Relations) {
  for (auto r : {Relation::Distance, Relation::Angle, Relation::Coincident, Relation::Concentric, Relation::Parallel})
    EXPECT_EQ(relation_from_string(to_string(r)), r);
  EXPECT_THROW(relation_from_string("touching"), Error);
}
