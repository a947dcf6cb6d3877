#include "skillspace/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace skillspace {

namespace {

Pose link_transform(const Joint& j, double q) {
  const double th = q + j.theta_offset;
  const double ct = std::cos(th), st = std::sin(th);
  const double ca = std::cos(j.alpha), sa = std::sin(j.alpha);
  Mat3 r;
  r << ct, -st * ca, st * sa,
       st, ct * ca, -ct * sa,
       0.0, sa, ca;
  return Pose{Vec3(j.a * ct, j.a * st, j.d), Rotation::from_matrix(r), std::nullopt};
}

void check_size(const KinematicChain& chain, const Eigen::VectorXd& q) {
  if (q.size() != static_cast<Eigen::Index>(chain.joints.size())) {
    throw Error(ErrorKind::InvalidArgument, "joint vector has " + std::to_string(q.size()) + " entries, chain has " +
                                                std::to_string(chain.joints.size()) + " joints");
  }
}

}  // namespace

void validate(const KinematicChain& chain) {
  if (chain.joints.empty()) throw Error(ErrorKind::InvalidArgument, "kinematic chain has no joints");
  for (std::size_t i = 0; i < chain.joints.size(); ++i) {
    const Joint& j = chain.joints[i];
    if (!std::isfinite(j.limits.lo) || !std::isfinite(j.limits.hi) || !(j.limits.lo < j.limits.hi))
      throw Error(ErrorKind::InvalidArgument, "joint " + std::to_string(i) + " needs finite limits with lo < hi");
    if (!std::isfinite(j.a) || !std::isfinite(j.alpha) || !std::isfinite(j.d) || !std::isfinite(j.theta_offset))
      throw Error(ErrorKind::InvalidArgument, "joint " + std::to_string(i) + " has non-finite parameters");
  }
}

ForwardKinematics forward_kinematics(const KinematicChain& chain, const Eigen::VectorXd& q) {
  check_size(chain, q);
  ForwardKinematics fk;
  fk.frames.reserve(chain.joints.size() + 1);
  Pose current = chain.base;
  current.timestamp.reset();
  fk.frames.push_back(current);
  for (std::size_t i = 0; i < chain.joints.size(); ++i) {
    current = compose(current, link_transform(chain.joints[i], q[static_cast<Eigen::Index>(i)]));
    fk.frames.push_back(current);
  }
  fk.end_effector = compose(current, chain.tool);
  fk.end_effector.timestamp.reset();
  return fk;
}

Eigen::MatrixXd jacobian(const KinematicChain& chain, const Eigen::VectorXd& q) {
  const ForwardKinematics fk = forward_kinematics(chain, q);
  const Vec3 pe = fk.end_effector.translation;
  Eigen::MatrixXd j(6, q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const Pose& f = fk.frames[static_cast<std::size_t>(i)];
    const Vec3 z = f.rotation * Vec3::UnitZ();
    j.block<3, 1>(0, i) = z.cross(pe - f.translation);
    j.block<3, 1>(3, i) = z;
  }
  return j;
}

Eigen::VectorXd mid_range(const KinematicChain& chain) {
  Eigen::VectorXd q(chain.joints.size());
  for (std::size_t i = 0; i < chain.joints.size(); ++i)
    q[static_cast<Eigen::Index>(i)] = 0.5 * (chain.joints[i].limits.lo + chain.joints[i].limits.hi);
  return q;
}

Eigen::VectorXd clamp_to_limits(const KinematicChain& chain, Eigen::VectorXd q) {
  check_size(chain, q);
  for (std::size_t i = 0; i < chain.joints.size(); ++i) {
    auto& v = q[static_cast<Eigen::Index>(i)];
    v = std::clamp(v, chain.joints[i].limits.lo, chain.joints[i].limits.hi);
  }
  return q;
}

double limit_violation(const KinematicChain& chain, const Eigen::VectorXd& q) {
  check_size(chain, q);
  double worst = 0.0;
  for (std::size_t i = 0; i < chain.joints.size(); ++i)
    worst = std::max(worst, chain.joints[i].limits.excess(q[static_cast<Eigen::Index>(i)]));
  return worst;
}

KinematicChain default_chain() {
  constexpr double pi = std::numbers::pi;
  KinematicChain c;
  c.name = "ur5";
  const Interval wide{-2.0 * pi, 2.0 * pi};
  const Interval elbow{-pi, pi};
  c.joints = {
      {0.0, pi / 2.0, 0.089159, 0.0, wide},  {-0.425, 0.0, 0.0, 0.0, wide},
      {-0.39225, 0.0, 0.0, 0.0, elbow},      {0.0, pi / 2.0, 0.10915, 0.0, wide},
      {0.0, -pi / 2.0, 0.09465, 0.0, wide},  {0.0, 0.0, 0.0823, 0.0, wide},
  };
  c.base = Pose::identity();
  // Tool z opposes the flange approach direction: an upright tool axis is a
  // top-down approach.
  c.tool = Pose{Vec3::Zero(), rotation_from_axis_angle(UnitVec3::checked(Vec3::UnitX()), pi), std::nullopt};
  return c;
}

}  // namespace skillspace
