#include <gtest/gtest.h>

#include "support.hpp"

using namespace skillspace;
using namespace skillspace::testing;

namespace {

Pose random_pose(Rng& rng) { return {random_point(rng, 1.0), rng.rotation(), std::nullopt}; }

void expect_pose_near(const Pose& a, const Pose& b, double tol) {
  EXPECT_LE((a.translation - b.translation).norm(), tol);
  EXPECT_LE(quaternion_distance(a.rotation, b.rotation), tol);
}

const UnitVec3 kX = UnitVec3::checked(Vec3::UnitX());
const UnitVec3 kZ = UnitVec3::checked(Vec3::UnitZ());

}  // namespace

TEST(Compose, IdentityIsNeutral) {
  Rng rng(1);
  const Pose p = random_pose(rng);
  expect_pose_near(compose(Pose::identity(), p), p, 0.0);
}

TEST(Compose, InverseGivesIdentity) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const Pose p = random_pose(rng);
    expect_pose_near(compose(p, inverse(p)), Pose::identity(), 1e-12);
  }
}

TEST(Compose, PureTranslationsAdd) {
  const Pose c = compose(Pose::from_translation({1, 0, 0}), Pose::from_translation({0, 1, 0}));
  EXPECT_EQ(c.translation, Vec3(1, 1, 0));
  EXPECT_EQ(c.rotation.wxyz(), Rotation::identity().wxyz());
}

TEST(Compose, Associative) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Pose a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    expect_pose_near(compose(compose(a, b), c), compose(a, compose(b, c)), 1e-12);
  }
}

TEST(Compose, KeepsTimestamp) {
  Pose a = Pose::from_translation({1, 2, 3});
  a.timestamp = 4.5;
  EXPECT_EQ(compose(a, Pose::identity()).timestamp, 4.5);
}

TEST(RelativePose, Examples) {
  Rng rng(4);
  const Pose p = random_pose(rng);
  expect_pose_near(relative_pose(p, p), Pose::identity(), 1e-12);
  expect_pose_near(relative_pose(Pose::identity(), p), p, 1e-15);
  const Pose d = relative_pose(Pose::from_translation({0, 0, 1}), Pose::from_translation({0, 0, 3}));
  EXPECT_EQ(d.translation, Vec3(0, 0, 2));
}

TEST(RelativePose, UndoesComposition) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Pose f = random_pose(rng), d = random_pose(rng);
    expect_pose_near(relative_pose(f, compose(f, d)), d, 1e-12);
  }
}

TEST(AxisAngle, Examples) {
  EXPECT_EQ(rotation_from_axis_angle(kZ, 0.0).wxyz(), Rotation::identity().wxyz());
  EXPECT_LE((rotation_from_axis_angle(kZ, kPi) * Vec3(1, 0, 0) - Vec3(-1, 0, 0)).norm(), 1e-12);
  EXPECT_LE((rotation_from_axis_angle(kX, kPi / 2) * Vec3(0, 1, 0) - Vec3(0, 0, 1)).norm(), 1e-12);
}

TEST(AxisAngle, RejectsNonUnitAxis) {
  try {
    rotation_from_axis_angle(Vec3(0, 0, 2), 1.0);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
  EXPECT_THROW(UnitVec3::checked(Vec3(1, 1e-4, 0)), Error);
  EXPECT_NO_THROW(UnitVec3::checked(Vec3(1 + 1e-10, 0, 0)));
}

TEST(AxisAngle, OppositeAnglesCancel) {
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    const UnitVec3 a = rng.direction();
    const double t = rng.uniform(-kPi, kPi);
    EXPECT_LE(quaternion_distance(rotation_from_axis_angle(a, t) * rotation_from_axis_angle(a, -t), Rotation()), 1e-12);
  }
}

TEST(RotationType, CanonicalSign) {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Rotation r = rng.rotation();
    EXPECT_GE(r.quat().w(), 0.0);
    EXPECT_NEAR(r.quat().norm(), 1.0, 1e-12);
    const Eigen::Quaterniond neg(-r.quat().w(), -r.quat().x(), -r.quat().y(), -r.quat().z());
    EXPECT_EQ(Rotation(neg).wxyz(), r.wxyz());
    EXPECT_EQ(Rotation(r.quat()).wxyz(), r.wxyz());
  }
}

TEST(RotationType, LogRoundTrip) {
  Rng rng(8);
  for (int i = 0; i < 500; ++i) {
    const Rotation r = rng.rotation();
    EXPECT_LE(quaternion_distance(rotation_from_vector(r.log()), r), 1e-12);
    EXPECT_LE(r.log().norm(), kPi + 1e-12);
  }
}

TEST(RotationType, Between) {
  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    const UnitVec3 a = rng.direction(), b = rng.direction();
    EXPECT_LE((rotation_between(a, b) * a.vec() - b.vec()).norm(), 1e-12);
  }
  EXPECT_LE((rotation_between(kZ, -kZ) * kZ.vec() + kZ.vec()).norm(), 1e-12);
}

TEST(AngleBetween, AccurateNearZeroAndPi) {
  EXPECT_NEAR(angle_between(Vec3(1, 0, 0), Vec3(1, 1e-10, 0)), 1e-10, 1e-22);
  EXPECT_NEAR(angle_between(Vec3(1, 0, 0), Vec3(-1, 1e-10, 0)), kPi - 1e-10, 1e-15);
  EXPECT_DOUBLE_EQ(angle_between(Vec3(1, 0, 0), Vec3(0, 3, 0)), kPi / 2);
}

TEST(Perpendicular, DeterministicFallback) {
  const UnitVec3 p = perpendicular_to(kZ);
  EXPECT_LE((p.vec() - Vec3::UnitX()).norm(), 1e-15);
  const UnitVec3 q = perpendicular_to(kX);
  EXPECT_LE((q.vec() - Vec3::UnitY()).norm(), 1e-15);
  Rng rng(10);
  for (int i = 0; i < 200; ++i) {
    const UnitVec3 a = rng.direction();
    EXPECT_LE(std::abs(perpendicular_to(a).dot(a.vec())), 1e-12);
  }
}

TEST(ShapeType, ValidateRejectsNonPositiveSizes) {
  Shape s{"cup", "body", CylinderShape{Vec3::Zero(), kZ, 0.03, 0.1}};
  EXPECT_NO_THROW(validate(s));
  s.geometry = CylinderShape{Vec3::Zero(), kZ, 0.03, 0.0};
  EXPECT_THROW(validate(s), Error);
  s.geometry = CircleShape{Vec3::Zero(), kZ, -1.0};
  EXPECT_THROW(validate(s), Error);
  EXPECT_EQ(s.qualified_name(), "cup/body");
  EXPECT_EQ(s.kind(), ShapeKind::Circle);
}

TEST(ShapeType, TransformedFollowsPose) {
  const Pose p{Vec3(1, 2, 3), rotation_from_axis_angle(kX, kPi / 2), std::nullopt};
  const Shape s = transformed(Shape{"o", "l", LineShape{Vec3(0, 1, 0), kZ}}, p);
  const auto& l = std::get<LineShape>(s.geometry);
  EXPECT_LE((l.p - Vec3(1, 2, 4)).norm(), 1e-12);
  EXPECT_LE((l.a.vec() - Vec3(0, -1, 0)).norm(), 1e-12);
}

TEST(ShapeType, KindNames) {
  for (auto k : {ShapeKind::Point, ShapeKind::Line, ShapeKind::Plane, ShapeKind::Circle, ShapeKind::Cylinder})
    EXPECT_EQ(shape_kind_from_string(to_string(k)), k);
  EXPECT_THROW(shape_kind_from_string("torus"), Error);
}
