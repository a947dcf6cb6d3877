#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "skillspace/manifolds.hpp"

namespace skillspace {

/// Revolute joint with standard serial-link frame parameters:
/// A = Rz(q + theta_offset) Tz(d) Tx(a) Rx(alpha).
struct Joint {
  double a = 0.0;      // link length
  double alpha = 0.0;  // link twist
  double d = 0.0;      // link offset
  double theta_offset = 0.0;
  Interval limits{-3.141592653589793, 3.141592653589793};
};

struct KinematicChain {
  std::string name;
  std::vector<Joint> joints;
  Pose base;  // first joint frame in world
  Pose tool;  // end effector in the last link frame
};

/// Throws InvalidArgument for an empty chain or non-finite / inverted limits.
void validate(const KinematicChain& chain);

struct ForwardKinematics {
  std::vector<Pose> frames;  // base, then each link frame (size = joints + 1)
  Pose end_effector;
};

/// Throws InvalidArgument when q has the wrong size.
ForwardKinematics forward_kinematics(const KinematicChain& chain, const Eigen::VectorXd& q);

/// 6 x n geometric Jacobian of the end effector in world coordinates:
/// rows 0-2 linear velocity, rows 3-5 angular velocity.
Eigen::MatrixXd jacobian(const KinematicChain& chain, const Eigen::VectorXd& q);

Eigen::VectorXd mid_range(const KinematicChain& chain);
Eigen::VectorXd clamp_to_limits(const KinematicChain& chain, Eigen::VectorXd q);
/// Largest amount by which any joint leaves its limits; 0 inside.
double limit_violation(const KinematicChain& chain, const Eigen::VectorXd& q);

/// Six-joint desk manipulator with UR5 dimensions. The tool z-axis points
/// back against the flange approach direction.
KinematicChain default_chain();

}  // namespace skillspace
