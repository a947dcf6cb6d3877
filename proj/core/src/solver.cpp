#include "skillspace/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "skillspace/least_squares.hpp"
#include "skillspace/random.hpp"

namespace skillspace {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool has(const PrioritySpec& p, Objective o) {
  for (const auto& tier : p.tiers)
    if (std::find(tier.begin(), tier.end(), o) != tier.end()) return true;
  return false;
}

Eigen::Vector4d quaternion_residual(const Rotation& projected, const Rotation& r) {
  const Eigen::Vector4d a = projected.wxyz(), b = r.wxyz();
  const Eigen::Vector4d minus = a - b, plus = a + b;
  return minus.squaredNorm() <= plus.squaredNorm() ? minus : plus;
}

double wrap_pi(double x) {
  x = std::fmod(x + kPi, 2.0 * kPi);
  if (x < 0.0) x += 2.0 * kPi;
  return x - kPi;
}

// Everything one solve needs; shared by discrete and trajectory modes.
struct Problem {
  const SkillModel& skill;
  const KinematicChain& chain;
  const Scene& scene;
  const std::vector<Obstacle>& obstacles;
  const PrioritySpec& priorities;
  const SolveOptions& options;
  NullspaceModel nullspace;  // fixed-object frame
  Pose fixed;                // fixed object in world
  Eigen::VectorXd mid;
  std::optional<Eigen::VectorXd> previous;

  Pose relative(const Eigen::VectorXd& q) const {
    return relative_pose(fixed, forward_kinematics(chain, q).end_effector);
  }

  double membership(const Pose& rel) const {
    return dist_t(nullspace.translation, rel.translation) + dist_r(nullspace.rotation, rel.rotation) +
           bounds_violation(nullspace.translation, rel.translation);
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& q) const {
    const Pose rel = relative(q);
    Eigen::VectorXd r(8);
    r.head<3>() = project_translation(nullspace.translation, rel.translation) - rel.translation;
    r[3] = bounds_violation(nullspace.translation, rel.translation);
    r.tail<4>() = quaternion_residual(project_rotation(nullspace.rotation, rel.rotation), rel.rotation);
    return r;
  }

  double soft(const Eigen::VectorXd& q) const {
    double s = 0.0;
    if (has(priorities, Objective::Posture)) s += 0.5 * (q - mid).squaredNorm();
    if (previous && has(priorities, Objective::StepDistance)) s += 0.5 * (q - *previous).squaredNorm();
    return s;
  }

  std::vector<ResidualEntry> evaluate(const Eigen::VectorXd& q) const {
    std::vector<ResidualEntry> out;
    const ForwardKinematics fk = forward_kinematics(chain, q);
    const Pose rel = relative_pose(fixed, fk.end_effector);
    if (has(priorities, Objective::JointLimits)) out.push_back({1, "joint-limits", limit_violation(chain, q)});
    if (has(priorities, Objective::Collision))
      out.push_back({1, "clearance", std::max(0.0, -clearance(chain, q, obstacles))});
    out.push_back({2, "nullspace", membership(rel)});
    for (const auto& c : skill.constraints)
      out.push_back({2, to_string(c), constraint_residual(c, fk.end_effector, scene, nullspace.rotation.selector)});
    if (has(priorities, Objective::Posture)) out.push_back({3, "posture", (q - mid).squaredNorm()});
    if (previous && has(priorities, Objective::StepDistance)) out.push_back({3, "step", (q - *previous).squaredNorm()});
    return out;
  }
};

double total(const std::vector<ResidualEntry>& entries, int tier) {
  double s = 0.0;
  for (const auto& e : entries)
    if (e.tier == tier) s += e.value;
  return s;
}

struct Candidate {
  Eigen::VectorXd q;
  std::vector<ResidualEntry> entries;
  int iterations = 0;

  bool converged(double tol) const { return total(entries, 1) == 0.0 && total(entries, 2) <= tol; }
  auto key() const { return std::tuple{total(entries, 1), total(entries, 2), total(entries, 3)}; }
};

// Damped least-squares inverse kinematics towards a world pose.
Eigen::VectorXd reach(const Problem& pb, const Pose& target, Eigen::VectorXd q, int budget, int& used) {
  for (int it = 0; it < budget; ++it) {
    const Pose ee = forward_kinematics(pb.chain, q).end_effector;
    Eigen::Matrix<double, 6, 1> e;
    e.head<3>() = target.translation - ee.translation;
    e.tail<3>() = (target.rotation * ee.rotation.inverse()).log();
    ++used;
    if (e.norm() < 1e-13) break;
    const Eigen::MatrixXd j = jacobian(pb.chain, q);
    const double damping = e.norm() > 1e-3 ? 1e-2 : 1e-5;
    const Eigen::Matrix<double, 6, 6> jjt = j * j.transpose() + damping * damping * Eigen::Matrix<double, 6, 6>::Identity();
    Eigen::VectorXd dq = j.transpose() * jjt.ldlt().solve(e);
    const double step = dq.cwiseAbs().maxCoeff();
    if (step > 0.4) dq *= 0.4 / step;
    q = clamp_to_limits(pb.chain, q + dq);
  }
  return q;
}

// Least-squares descent of the nullspace residual, clamped to the limits.
Eigen::VectorXd polish(const Problem& pb, const Eigen::VectorXd& q0, int budget, int& used) {
  if (budget <= 0) return q0;
  LeastSquaresOptions o;
  o.max_iterations = budget;
  o.finite_difference_step = 1e-7;
  const LeastSquaresReport rep = levenberg_marquardt([&](const Eigen::VectorXd& q) { return pb.residual(q); }, q0, o,
                                                     [&](Eigen::VectorXd& q) { q = clamp_to_limits(pb.chain, q); });
  used += std::max(rep.iterations, 1);
  return rep.x;
}

// Soft-tier descent restricted to directions that leave the geometric
// residual unchanged to first order.
Eigen::VectorXd refine(const Problem& pb, Eigen::VectorXd q, int budget, int& used) {
  const bool posture = has(pb.priorities, Objective::Posture);
  const bool step = pb.previous && has(pb.priorities, Objective::StepDistance);
  if (!posture && !step) return q;
  const double tight = pb.options.tolerance * 1e-3;
  const bool clear = clearance(pb.chain, q, pb.obstacles) >= 0.0;
  for (int it = 0; it < 10 && used < budget; ++it) {
    const Eigen::MatrixXd j =
        numerical_jacobian([&](const Eigen::VectorXd& x) { return pb.residual(x); }, q, 1e-7);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = 1e-6 * std::max(1.0, sv.size() ? sv[0] : 0.0);
    Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(q.size(), q.size());
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
      if (sv[k] > cutoff) proj -= svd.matrixV().col(k) * svd.matrixV().col(k).transpose();
    }
    Eigen::VectorXd g = Eigen::VectorXd::Zero(q.size());
    if (posture) g += q - pb.mid;
    if (step) g += q - *pb.previous;
    const Eigen::VectorXd d = -(proj * g);
    if (d.norm() < 1e-9) break;

    const double before = pb.soft(q);
    bool accepted = false;
    double alpha = 1.0;
    for (int ls = 0; ls < 6 && used < budget; ++ls, alpha *= 0.5) {
      Eigen::VectorXd trial = clamp_to_limits(pb.chain, q + alpha * d);
      trial = polish(pb, trial, std::min(20, budget - used), used);
      if (pb.membership(pb.relative(trial)) > tight) continue;
      if (clear && clearance(pb.chain, trial, pb.obstacles) < 0.0) continue;
      if (pb.soft(trial) < before - 1e-12) {
        q = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return q;
}

bool target_clear(const Problem& pb, const Pose& world) {
  for (const auto& o : pb.obstacles)
    if ((world.translation - o.center).norm() < o.radius + o.margin) return false;
  return true;
}

Candidate attempt(const Problem& pb, const std::optional<Pose>& target, const Eigen::VectorXd& q0) {
  Candidate c;
  int used = 0;
  const int budget = pb.options.max_iterations;
  Eigen::VectorXd q = q0;
  if (target) q = reach(pb, *target, q, std::min(200, budget), used);
  q = polish(pb, q, std::min(100, budget - used), used);
  if (pb.membership(pb.relative(q)) <= pb.options.tolerance) q = refine(pb, q, budget, used);
  c.q = q;
  c.entries = pb.evaluate(q);
  c.iterations = used;
  return c;
}

SolveResult finish(const Problem& pb, const Candidate& best, int iterations, int attempts) {
  SolveResult r;
  r.q = best.q;
  r.end_effector = forward_kinematics(pb.chain, best.q).end_effector;
  r.residuals = best.entries;
  r.converged = best.converged(pb.options.tolerance);
  r.iterations = iterations;
  r.attempts = attempts;
  return r;
}

// Projection from the warm start first (trajectory mode), then seeded
// nullspace samples until one converges or the budget runs out.
SolveResult run(const Problem& pb, std::uint64_t seed, const Eigen::VectorXd& start, bool project_first) {
  std::optional<Candidate> best;
  int iterations = 0, attempts = 0;
  const auto consider = [&](Candidate c) {
    iterations += c.iterations;
    ++attempts;
    if (!best || c.key() < best->key()) best = std::move(c);
    return best->converged(pb.options.tolerance);
  };

  if (project_first && consider(attempt(pb, std::nullopt, start))) return finish(pb, *best, iterations, attempts);

  for (int k = 0; k < pb.options.retry_budget; ++k) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(k));
    const Pose world = compose(pb.fixed, sample_pose(pb.nullspace, SampleSpec{}, s));
    if (!target_clear(pb, world)) {
      if (!best) {
        Candidate c;
        c.q = start;
        c.entries = pb.evaluate(start);
        consider(std::move(c));
      } else {
        ++attempts;
      }
      continue;
    }
    if (consider(attempt(pb, world, start))) break;
    Rng rng(s ^ 0x51a7e5eedULL);
    Eigen::VectorXd random_start(start.size());
    for (std::size_t i = 0; i < pb.chain.joints.size(); ++i)
      random_start[static_cast<Eigen::Index>(i)] = rng.uniform(pb.chain.joints[i].limits.lo, pb.chain.joints[i].limits.hi);
    if (consider(attempt(pb, world, random_start))) break;
  }
  return finish(pb, *best, iterations, attempts);
}

void check_inputs(const SkillModel& skill, const KinematicChain& chain, const Scene& scene,
                  const std::vector<Obstacle>& obstacles, const PrioritySpec& priorities, const SolveOptions& options) {
  validate(chain);
  validate(priorities);
  for (const auto& o : obstacles) validate(o);
  if (options.retry_budget < 1 || options.max_iterations < 1 || !(options.tolerance > 0.0))
    throw Error(ErrorKind::InvalidArgument, "solve options need positive budgets and tolerance");
  if (!scene.has_object(skill.fixed_object))
    throw Error(ErrorKind::InvalidArgument, "scene lacks the skill's fixed object '" + skill.fixed_object + "'");
}

}  // namespace

void validate(const Obstacle& o) {
  if (!(o.radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "obstacle radius must be positive");
  if (!(o.margin >= 0.0)) throw Error(ErrorKind::InvalidArgument, "obstacle margin must be non-negative");
  if (!o.center.allFinite()) throw Error(ErrorKind::InvalidArgument, "obstacle center must be finite");
}

std::string to_string(Objective o) {
  switch (o) {
    case Objective::JointLimits: return "joint-limits";
    case Objective::Collision: return "collision";
    case Objective::Geometric: return "geometric";
    case Objective::Posture: return "posture";
    case Objective::StepDistance: return "step-distance";
  }
  return "?";
}

Objective objective_from_string(const std::string& s) {
  for (auto o : {Objective::JointLimits, Objective::Collision, Objective::Geometric, Objective::Posture,
                 Objective::StepDistance})
    if (to_string(o) == s) return o;
  throw Error(ErrorKind::Parse, "unknown objective '" + s + "'");
}

void validate(const PrioritySpec& p) {
  if (p.tiers.size() < 2) throw Error(ErrorKind::InvalidArgument, "priority spec needs at least two tiers");
  for (const auto& t : p.tiers)
    if (t.empty()) throw Error(ErrorKind::InvalidArgument, "priority tiers must be non-empty");
  for (auto o : p.tiers[0])
    if (o != Objective::JointLimits && o != Objective::Collision)
      throw Error(ErrorKind::InvalidArgument, "tier 1 holds only joint limits and collision avoidance");
  if (p.tiers[1] != std::vector<Objective>{Objective::Geometric})
    throw Error(ErrorKind::InvalidArgument, "tier 2 holds exactly the geometric constraints");
  for (std::size_t i = 2; i < p.tiers.size(); ++i)
    for (auto o : p.tiers[i])
      if (o != Objective::Posture && o != Objective::StepDistance)
        throw Error(ErrorKind::InvalidArgument, "soft tiers hold only posture and step distance");
  if (!(p.tier_ratio >= 1e3)) throw Error(ErrorKind::InvalidArgument, "tier ratio must be at least 1e3");
}

double SolveResult::tier_total(int tier) const { return total(residuals, tier); }

double clearance(const KinematicChain& chain, const Eigen::VectorXd& q, const std::vector<Obstacle>& obstacles) {
  if (obstacles.empty()) return std::numeric_limits<double>::infinity();
  const ForwardKinematics fk = forward_kinematics(chain, q);
  std::vector<Vec3> points;
  for (std::size_t i = 0; i < fk.frames.size(); ++i) {
    points.push_back(fk.frames[i].translation);
    if (i > 0) points.push_back(0.5 * (fk.frames[i].translation + fk.frames[i - 1].translation));
  }
  points.push_back(fk.end_effector.translation);
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& o : obstacles)
    for (const auto& p : points) worst = std::min(worst, (p - o.center).norm() - o.radius - o.margin);
  return worst;
}

std::vector<ResidualEntry> evaluate(const SkillModel& skill, const KinematicChain& chain, const Scene& scene,
                                    const std::vector<Obstacle>& obstacles, const Eigen::VectorXd& q,
                                    const std::optional<Eigen::VectorXd>& previous) {
  const PrioritySpec priorities;
  const SolveOptions options;
  Problem pb{skill, chain, scene, obstacles, priorities, options,
             skill.nullspace, scene.object(skill.fixed_object).pose, mid_range(chain), previous};
  return pb.evaluate(q);
}

SolveResult solve(const SkillModel& skill, const KinematicChain& chain, const Scene& scene,
                  const std::vector<Obstacle>& obstacles, const PrioritySpec& priorities, std::uint64_t seed,
                  const SolveOptions& options, const std::optional<Eigen::VectorXd>& start) {
  check_inputs(skill, chain, scene, obstacles, priorities, options);
  Problem pb{skill, chain, scene, obstacles, priorities, options,
             skill.nullspace, scene.object(skill.fixed_object).pose, mid_range(chain), std::nullopt};
  const Eigen::VectorXd q0 = start ? clamp_to_limits(chain, *start) : pb.mid;
  return run(pb, seed, q0, false);
}

NullspaceModel waypoint_nullspace(const SkillModel& skill, double parameter) {
  if (!skill.trajectory) throw Error(ErrorKind::InvalidArgument, "skill '" + skill.name + "' has no trajectory");
  NullspaceModel n = skill.nullspace;
  const std::string& kind = skill.trajectory->parameter;
  if (kind == "line" || kind == "circle") {
    n.translation.bounds = ExtentBounds{{{parameter, parameter}}};
  } else if (kind == "angle") {
    auto* a = std::get_if<OneAngle>(&n.rotation.form);
    if (!a) throw Error(ErrorKind::InvalidArgument, "angle trajectory needs a OneAngle rotation model");
    a->theta = parameter;
    a->interval = Interval{parameter, parameter};
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown trajectory parameter '" + kind + "'");
  }
  return n;
}

double trajectory_parameter(const SkillModel& skill, const Pose& relative) {
  if (!skill.trajectory) throw Error(ErrorKind::InvalidArgument, "skill '" + skill.name + "' has no trajectory");
  const std::string& kind = skill.trajectory->parameter;
  if (kind == "angle") {
    const auto* a = std::get_if<OneAngle>(&skill.nullspace.rotation.form);
    if (!a) throw Error(ErrorKind::InvalidArgument, "angle trajectory needs a OneAngle rotation model");
    return angle_between(constrained_axis(relative.rotation, skill.nullspace.rotation.selector), a->vf);
  }
  return coordinates(skill.nullspace.translation, relative.translation).at(0);
}

TrajectoryResult solve_trajectory(const SkillModel& skill, const KinematicChain& chain, const Scene& scene,
                                  const std::vector<Obstacle>& obstacles, const PrioritySpec& priorities,
                                  std::uint64_t seed, const SolveOptions& options) {
  if (skill.kind != DemonstrationKind::Continuous || !skill.trajectory || skill.trajectory->values.empty())
    throw Error(ErrorKind::InvalidArgument, "skill '" + skill.name + "' is not a trajectory skill");
  check_inputs(skill, chain, scene, obstacles, priorities, options);

  TrajectoryResult out;
  const Pose fixed = scene.object(skill.fixed_object).pose;
  std::optional<Eigen::VectorXd> previous;
  const auto& values = skill.trajectory->values;
  for (std::size_t k = 0; k < values.size(); ++k) {
    Problem pb{skill, chain, scene, obstacles, priorities, options,
               waypoint_nullspace(skill, values[k]), fixed, mid_range(chain), previous};
    SolveResult r = run(pb, derive_seed(seed, 1000 + k), previous.value_or(pb.mid), previous.has_value());

    double p = trajectory_parameter(skill, relative_pose(fixed, r.end_effector));
    if (skill.trajectory->parameter == "circle") {
      const double ref = out.parameters.empty() ? values[k] : out.parameters.back();
      p = ref + wrap_pi(p - ref);
    }
    out.parameters.push_back(p);
    if (r.converged) {
      previous = r.q;
    } else if (!out.failed_index) {
      out.failed_index = k;
    }
    out.waypoints.push_back(std::move(r));
  }
  return out;
}

}  // namespace skillspace
