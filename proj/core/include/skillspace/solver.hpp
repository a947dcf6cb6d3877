#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "skillspace/constraints.hpp"
#include "skillspace/kinematics.hpp"

namespace skillspace {

struct Obstacle {
  Vec3 center = Vec3::Zero();
  double radius = 0.05;
  double margin = 0.0;
};

void validate(const Obstacle& o);

enum class Objective { JointLimits, Collision, Geometric, Posture, StepDistance };

std::string to_string(Objective o);
Objective objective_from_string(const std::string& s);

/// Objectives grouped into tiers, highest priority first. The first tier is
/// hard; the last soft tier holds posture and step distance.
struct PrioritySpec {
  std::vector<std::vector<Objective>> tiers{
      {Objective::JointLimits, Objective::Collision},
      {Objective::Geometric},
      {Objective::Posture, Objective::StepDistance},
  };
  double tier_ratio = 1e3;  // weight of a tier relative to the next
};

/// Throws InvalidArgument unless tier 1 holds exactly the hard objectives and
/// tier 2 exactly the geometric one.
void validate(const PrioritySpec& p);

struct SolveOptions {
  int retry_budget = 32;       // nullspace samples per solve
  int max_iterations = 500;    // per attempt
  double tolerance = 1e-6;     // tier-2 convergence threshold
};

struct ResidualEntry {
  int tier = 1;      // 1-based
  std::string name;  // "joint-limits", "clearance", "nullspace", constraint text, "posture", "step"
  double value = 0.0;
};

struct SolveResult {
  Eigen::VectorXd q;
  Pose end_effector;
  std::vector<ResidualEntry> residuals;
  bool converged = false;
  int iterations = 0;
  int attempts = 0;

  double tier_total(int tier) const;
};

/// Smallest clearance surplus (distance - radius - margin) over the link
/// frame origins, the midpoints between consecutive origins and the end
/// effector; +inf without obstacles.
double clearance(const KinematicChain& chain, const Eigen::VectorXd& q, const std::vector<Obstacle>& obstacles);

/// Residual report of configuration q for the skill (optionally relative to
/// a previous configuration for the step term).
std::vector<ResidualEntry> evaluate(const SkillModel& skill, const KinematicChain& chain, const Scene& scene,
                                    const std::vector<Obstacle>& obstacles, const Eigen::VectorXd& q,
                                    const std::optional<Eigen::VectorXd>& previous = std::nullopt);

/// Exact sampling on the skill nullspace followed by iterative refinement in
/// joint space. Deterministic for a given seed.
SolveResult solve(const SkillModel& skill, const KinematicChain& chain, const Scene& scene,
                  const std::vector<Obstacle>& obstacles, const PrioritySpec& priorities, std::uint64_t seed,
                  const SolveOptions& options = {}, const std::optional<Eigen::VectorXd>& start = std::nullopt);

struct TrajectoryResult {
  std::vector<SolveResult> waypoints;
  std::vector<double> parameters;      // trajectory parameter measured at each solution
  std::optional<std::size_t> failed_index;  // first waypoint that did not converge
};

/// Solves the waypoints of a continuous skill in order, warm-starting each
/// from the previous solution. Throws InvalidArgument for discrete skills.
TrajectoryResult solve_trajectory(const SkillModel& skill, const KinematicChain& chain, const Scene& scene,
                                  const std::vector<Obstacle>& obstacles, const PrioritySpec& priorities,
                                  std::uint64_t seed, const SolveOptions& options = {});

/// Skill nullspace restricted to one trajectory parameter value.
NullspaceModel waypoint_nullspace(const SkillModel& skill, double parameter);

/// Trajectory parameter of a relative pose (fixed-object frame).
double trajectory_parameter(const SkillModel& skill, const Pose& relative);

}  // namespace skillspace
