#include <gtest/gtest.h>

#include "support.hpp"

using namespace skillspace;
using namespace skillspace::testing;

namespace {

KinematicChain planar_two_link() {
  KinematicChain c;
  c.name = "planar";
  c.joints = {Joint{1.0, 0.0, 0.0, 0.0, {-kPi, kPi}}, Joint{1.0, 0.0, 0.0, 0.0, {-kPi, kPi}}};
  return c;
}

// Homogeneous-matrix product of the link transforms, independent of Pose.
Eigen::Matrix4d link_product(const KinematicChain& chain, const Eigen::VectorXd& q) {
  const auto h = [](const Pose& p) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = p.rotation.matrix();
    m.topRightCorner<3, 1>() = p.translation;
    return m;
  };
  Eigen::Matrix4d m = h(chain.base);
  for (std::size_t i = 0; i < chain.joints.size(); ++i) {
    const Joint& j = chain.joints[i];
    const double t = q[i] + j.theta_offset;
    Eigen::Matrix4d rz = Eigen::Matrix4d::Identity(), tz = Eigen::Matrix4d::Identity(), tx = Eigen::Matrix4d::Identity(),
                    rx = Eigen::Matrix4d::Identity();
    rz.topLeftCorner<2, 2>() << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    tz(2, 3) = j.d;
    tx(0, 3) = j.a;
    rx.block<2, 2>(1, 1) << std::cos(j.alpha), -std::sin(j.alpha), std::sin(j.alpha), std::cos(j.alpha);
    m = m * rz * tz * tx * rx;
  }
  return m * h(chain.tool);
}

void check_converged(const SolveResult& r, const SkillModel& s, const KinematicChain& chain,
                     const std::vector<Obstacle>& obstacles = {}) {
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.tier_total(2), 1e-6);
  EXPECT_EQ(limit_violation(chain, r.q), 0.0);
  const Pose fk = forward_kinematics(chain, r.q).end_effector;
  EXPECT_LE((fk.translation - r.end_effector.translation).norm(), 1e-12);
  for (const auto& c : s.constraints)
    EXPECT_LE(constraint_residual(c, fk, s.scene, s.nullspace.rotation.selector), 1e-6) << to_string(c);
  const Pose rel = relative_pose(s.scene.object(s.fixed_object).pose, fk);
  EXPECT_LE(dist_t(s.nullspace, rel), 1e-6);
  EXPECT_LE(dist_r(s.nullspace, rel), 1e-6);
  const auto frames = forward_kinematics(chain, r.q).frames;
  for (const auto& o : obstacles)
    for (const Pose& f : frames) EXPECT_GE((f.translation - o.center).norm(), o.radius + o.margin - 1e-12);
}

}  // namespace

// ---- kinematics -----------------------------------------------------------------------

TEST(ForwardKinematics, PlanarTwoLink) {
  const KinematicChain c = planar_two_link();
  EXPECT_LE((forward_kinematics(c, Eigen::Vector2d(0, 0)).end_effector.translation - Vec3(2, 0, 0)).norm(), 1e-15);
  EXPECT_LE((forward_kinematics(c, Eigen::Vector2d(kPi / 2, 0)).end_effector.translation - Vec3(0, 2, 0)).norm(), 1e-15);
}

TEST(ForwardKinematics, MatchesMatrixProduct) {
  const KinematicChain c = default_chain();
  Rng rng(70);
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd q(6);
    for (int k = 0; k < 6; ++k) q[k] = i == 0 ? 0.0 : rng.uniform(-kPi, kPi);
    const Pose ee = forward_kinematics(c, q).end_effector;
    const Eigen::Matrix4d m = link_product(c, q);
    EXPECT_LE((ee.translation - m.topRightCorner<3, 1>()).norm(), 1e-12);
    EXPECT_LE((ee.rotation.matrix() - m.topLeftCorner<3, 3>()).norm(), 1e-12);
  }
}

TEST(ForwardKinematics, FramesAndErrors) {
  const KinematicChain c = default_chain();
  const auto fk = forward_kinematics(c, Eigen::VectorXd::Zero(6));
  EXPECT_EQ(fk.frames.size(), 7u);
  EXPECT_THROW(forward_kinematics(c, Eigen::VectorXd::Zero(5)), Error);
}

TEST(Jacobian, MatchesFiniteDifferences) {
  const KinematicChain c = default_chain();
  Rng rng(71);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd q(6);
    for (int k = 0; k < 6; ++k) q[k] = rng.uniform(-2.0, 2.0);
    const Eigen::MatrixXd j = jacobian(c, q);
    const Pose p0 = forward_kinematics(c, q).end_effector;
    for (int k = 0; k < 6; ++k) {
      Eigen::VectorXd qp = q;
      const double h = 1e-7;
      qp[k] += h;
      const Pose p1 = forward_kinematics(c, qp).end_effector;
      const Vec3 v = (p1.translation - p0.translation) / h;
      const Vec3 w = (p1.rotation * p0.rotation.inverse()).log() / h;
      EXPECT_LE((j.block<3, 1>(0, k) - v).norm(), 1e-5);
      EXPECT_LE((j.block<3, 1>(3, k) - w).norm(), 1e-5);
    }
  }
}

TEST(Chain, LimitsAndValidation) {
  const KinematicChain c = default_chain();
  EXPECT_NO_THROW(validate(c));
  Eigen::VectorXd q = Eigen::VectorXd::Constant(6, 100.0);
  EXPECT_GT(limit_violation(c, q), 0.0);
  EXPECT_EQ(limit_violation(c, clamp_to_limits(c, q)), 0.0);
  EXPECT_EQ(limit_violation(c, mid_range(c)), 0.0);
  KinematicChain bad = c;
  bad.joints[0].limits = {1.0, -1.0};
  EXPECT_THROW(validate(bad), Error);
  EXPECT_THROW(validate(KinematicChain{}), Error);
}

// ---- priorities and obstacles ------------------------------------------------------------

TEST(Priorities, DefaultTiers) {
  const PrioritySpec p;
  EXPECT_NO_THROW(validate(p));
  EXPECT_GE(p.tier_ratio, 1e3);
  PrioritySpec swapped = p;
  std::swap(swapped.tiers[0], swapped.tiers[1]);
  EXPECT_THROW(validate(swapped), Error);
  PrioritySpec empty = p;
  empty.tiers[2].clear();
  EXPECT_THROW(validate(empty), Error);
}

TEST(ObstacleType, Validation) {
  EXPECT_NO_THROW(validate(Obstacle{Vec3::Zero(), 0.1, 0.0}));
  EXPECT_THROW(validate(Obstacle{Vec3::Zero(), 0.0, 0.0}), Error);
  EXPECT_THROW(validate(Obstacle{Vec3::Zero(), 0.1, -0.01}), Error);
}

TEST(Clearance, InfiniteWithoutObstacles) {
  const KinematicChain c = default_chain();
  EXPECT_TRUE(std::isinf(clearance(c, mid_range(c), {})));
  const Vec3 ee = forward_kinematics(c, mid_range(c)).end_effector.translation;
  EXPECT_NEAR(clearance(c, mid_range(c), {{ee, 0.05, 0.01}}), -0.06, 1e-12);
}

// ---- discrete solves ------------------------------------------------------------------------

TEST(Solve, PlaceAndGrasp) {
  const Scene scene = default_scene();
  const KinematicChain chain = default_chain();
  for (const char* name : {"place", "grasp", "move"}) {
    const SkillModel s = skill_template(name, scene);
    for (std::uint64_t seed = 0; seed < 5; ++seed) check_converged(solve(s, chain, s.scene, {}, {}, seed), s, chain);
  }
}

TEST(Solve, Deterministic) {
  const SkillModel s = skill_template("grasp", default_scene());
  const KinematicChain chain = default_chain();
  const SolveResult a = solve(s, chain, s.scene, {}, {}, 9), b = solve(s, chain, s.scene, {}, {}, 9);
  EXPECT_EQ(a.q, b.q);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.residuals.size(), b.residuals.size());
}

TEST(Solve, GraspMovesAwayFromBlockingObstacle) {
  const SkillModel s = skill_template("grasp", default_scene());
  const KinematicChain chain = default_chain();
  const SolveResult plain = solve(s, chain, s.scene, {}, {}, 3);
  ASSERT_TRUE(plain.converged);
  // sphere centred on the obstacle-free grasp point
  const Obstacle o{plain.end_effector.translation, 0.02, 0.005};
  EXPECT_LT(clearance(chain, plain.q, {o}), 0.0);
  const SolveResult r = solve(s, chain, s.scene, {o}, {}, 3);
  check_converged(r, s, chain, {o});
  EXPECT_GE(clearance(chain, r.q, {o}), 0.0);
  EXPECT_GT((r.end_effector.translation - plain.end_effector.translation).norm(), 0.025);
}

TEST(Solve, UnreachableReportsFailure) {
  Scene scene = default_scene();
  scene.objects[0].pose = Pose::from_translation({0, 0, 5});
  const SkillModel s = skill_template("place", scene);
  SolveOptions opt;
  opt.retry_budget = 4;
  const SolveResult r = solve(s, default_chain(), s.scene, {}, {}, 1, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_FALSE(r.residuals.empty());
  EXPECT_GT(r.tier_total(2), 1e-6);
  EXPECT_EQ(r.tier_total(1), 0.0);
}

TEST(Solve, NeverTradesHardTierForGeometry) {
  // an obstacle swallowing the whole grasp cylinder: no tier-1 feasible grasp
  const SkillModel s = skill_template("grasp", default_scene());
  const KinematicChain chain = default_chain();
  const Vec3 cup = s.scene.object("cup").pose.translation + Vec3(0, 0, 0.05);
  SolveOptions opt;
  opt.retry_budget = 4;
  const SolveResult r = solve(s, chain, s.scene, {{cup, 0.12, 0.0}}, {}, 2, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_FALSE(r.residuals.empty());
  EXPECT_GT(r.attempts, 0);
  // the arm can always stay clear of the sphere, so the best candidate must
  EXPECT_EQ(r.tier_total(1), 0.0);
  EXPECT_GE(clearance(chain, r.q, {{cup, 0.12, 0.0}}), 0.0);
  EXPECT_GT(r.tier_total(2), 1e-6);
}

TEST(Evaluate, ReportsEveryTier) {
  const SkillModel s = skill_template("place", default_scene());
  const KinematicChain chain = default_chain();
  const auto rep = evaluate(s, chain, s.scene, {}, mid_range(chain), mid_range(chain));
  for (int tier = 1; tier <= 3; ++tier)
    EXPECT_TRUE(std::any_of(rep.begin(), rep.end(), [&](const ResidualEntry& e) { return e.tier == tier; })) << tier;
  for (const auto& e : rep) EXPECT_GE(e.value, 0.0);
}

// ---- trajectories ---------------------------------------------------------------------------

TEST(SolveTrajectory, PourMixPull) {
  const Scene scene = default_scene();
  const KinematicChain chain = default_chain();
  for (const char* name : {"pour", "mix", "pull"}) {
    const SkillModel s = skill_template(name, scene);
    const TrajectoryResult t = solve_trajectory(s, chain, s.scene, {}, {}, 4);
    ASSERT_EQ(t.waypoints.size(), s.trajectory->values.size());
    EXPECT_FALSE(t.failed_index);
    for (std::size_t k = 0; k < t.waypoints.size(); ++k) {
      check_converged(t.waypoints[k], s, chain);
      const Pose rel = relative_pose(s.scene.object(s.fixed_object).pose, t.waypoints[k].end_effector);
      const NullspaceModel w = waypoint_nullspace(s, s.trajectory->values[k]);
      EXPECT_LE(dist_t(w, rel), 1e-6) << name << " " << k;
      EXPECT_LE(dist_r(w, rel), 1e-6) << name << " " << k;
      EXPECT_NEAR(t.parameters[k], s.trajectory->values[k], 1e-6) << name << " " << k;
    }
  }
}

TEST(SolveTrajectory, PullBlockedMidLine) {
  const SkillModel s = skill_template("pull", default_scene());
  const KinematicChain chain = default_chain();
  const std::size_t blocked = 5;
  const Pose table = s.scene.object(s.fixed_object).pose;
  // the waypoint position itself, from the path line
  const auto& path = std::get<LineShape>(s.scene.world_shape({"table", "pull-path", ShapeKind::Line}).geometry);
  const Vec3 centre = path.p + s.trajectory->values[blocked] * path.a.vec();
  EXPECT_LE((table.apply(point_at(s.nullspace.translation, {s.trajectory->values[blocked]})) - centre).norm(), 1e-12);
  const Obstacle o{centre, 0.008, 0.0};
  const TrajectoryResult t = solve_trajectory(s, chain, s.scene, {o}, {}, 4);
  ASSERT_TRUE(t.failed_index);
  EXPECT_EQ(*t.failed_index, blocked);
}

TEST(SolveTrajectory, DiscreteSkillRejected) {
  const SkillModel s = skill_template("grasp", default_scene());
  EXPECT_THROW(solve_trajectory(s, default_chain(), s.scene, {}, {}, 1), Error);
}

TEST(TrajectoryParameter, InvertsWaypointNullspace) {
  const Scene scene = default_scene();
  for (const char* name : {"pour", "mix", "pull"}) {
    const SkillModel s = skill_template(name, scene);
    for (std::size_t k = 0; k < s.trajectory->values.size(); ++k) {
      const double v = s.trajectory->values[k];
      const Pose p = sample_pose(waypoint_nullspace(s, v), {}, 10 + k);
      EXPECT_NEAR(trajectory_parameter(s, p), v, 1e-9) << name;
    }
  }
}

TEST(Names, Objectives) {
  for (auto o : {Objective::JointLimits, Objective::Collision, Objective::Geometric, Objective::Posture,
                 Objective::StepDistance})
    EXPECT_EQ(objective_from_string(to_string(o)), o);
}
