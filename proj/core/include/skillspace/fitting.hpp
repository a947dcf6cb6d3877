#pragma once

#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "skillspace/manifolds.hpp"

namespace skillspace {

enum class DemonstrationKind { Discrete, Continuous };

std::string to_string(DemonstrationKind k);
DemonstrationKind demonstration_kind_from_string(const std::string& s);

/// Relative poses of the constrained frame in the fixed frame.
struct Demonstration {
  std::vector<Pose> samples;
  DemonstrationKind kind = DemonstrationKind::Discrete;
  std::string fixed_label;
  std::string constrained_label;
};

/// Throws InvalidArgument for an empty demonstration, or a continuous one
/// missing timestamps.
void validate(const Demonstration& d);

/// Rotation models tried by model selection. OneAngleInterval is the OneAngle
/// manifold with an angle interval [lo, hi] instead of a single angle.
enum class RotationCandidate { OneParallel, OneAngle, OneAngleInterval, FullSO3 };

std::string to_string(RotationCandidate c);
int dimension(RotationCandidate c);

struct ModelCandidate {
  TranslationType translation = TranslationType::Full3Space;
  RotationCandidate rotation = RotationCandidate::FullSO3;
  bool operator==(const ModelCandidate&) const = default;
};

std::string to_string(const ModelCandidate& c);

struct FitConfig {
  std::vector<TranslationType> translation_candidates{TranslationType::Point,    TranslationType::Line,
                                                      TranslationType::Circle,   TranslationType::Plane,
                                                      TranslationType::Cylinder, TranslationType::Full3Space};
  std::vector<RotationCandidate> rotation_candidates{RotationCandidate::OneParallel, RotationCandidate::OneAngle,
                                                     RotationCandidate::OneAngleInterval, RotationCandidate::FullSO3};
  double tau = 5e-3;     // RMS acceptance threshold
  double lambda = 1.0;   // weight of the rotation residual
  int max_iterations = 200;
  double step_tolerance = 1e-15;
  double gradient_tolerance = 1e-16;
  AxisSelector selector = AxisSelector::PosZ;
  /// Interval models whose enclosing cone is wider than this are rejected;
  /// they would not restrict the rotation in any useful way.
  double max_interval_half_angle = std::numbers::pi / 2.0;
};

void validate(const FitConfig& cfg);

struct FitResult {
  NullspaceModel model;
  std::vector<double> residuals;  // dist_t + lambda * dist_r per sample
  double rms = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> cost_history;  // translation then rotation refinement
};

/// Minimum number of samples that determines the model.
int min_samples(TranslationType t);
int min_samples(RotationCandidate r);

/// Closed-form seed of the translation parameters. Layout:
///   Point [p] | Line [p, a] | Circle [p, n, r] | Plane [p, n] | Cylinder [p, a, r] | Full3Space []
/// Throws InsufficientData when the demonstration is too small for the model.
Eigen::VectorXd init_params(const Demonstration& d, TranslationType t, AxisSelector selector = AxisSelector::PosZ);
/// Closed-form seed of the rotation parameters. Layout:
///   OneParallel [vf] | OneAngle [vf, theta] | OneAngleInterval [vf, lo, hi] | FullSO3 []
Eigen::VectorXd init_params(const Demonstration& d, RotationCandidate r, AxisSelector selector = AxisSelector::PosZ);

TranslationManifold translation_from_params(TranslationType t, const Eigen::VectorXd& params);
RotationManifold rotation_from_params(RotationCandidate r, const Eigen::VectorXd& params, AxisSelector selector);

/// Per-sample dist_t + lambda * dist_r.
std::vector<double> combined_residuals(const Demonstration& d, const NullspaceModel& m, double lambda);
double rms(const std::vector<double>& residuals);

/// Damped least-squares refinement of one model pair.
FitResult fit_manifold(const Demonstration& d, const ModelCandidate& candidate, const FitConfig& cfg);

struct CandidateReport {
  ModelCandidate candidate;
  double rms = std::numeric_limits<double>::infinity();
  bool passed = false;
  std::string note;  // why a candidate was skipped
};

struct SelectionReport {
  FitResult result;
  std::vector<CandidateReport> candidates;  // in evaluation order
  std::optional<std::size_t> chosen;        // index into candidates; empty on fallback
};

/// Candidate grid ordered most restrictive first: combined nullspace
/// dimension, then rotation order, then translation order. The unconstrained
/// pair (Full3Space, FullSO3) is not a candidate; it is the fallback.
std::vector<ModelCandidate> candidate_order(const FitConfig& cfg);

SelectionReport select_model_report(const Demonstration& d, const FitConfig& cfg);
FitResult select_model(const Demonstration& d, const FitConfig& cfg);

struct BoundsConfig {
  double margin_fraction = 0.05;  // of the observed span, on each side
  double angle_margin_cap = 0.25 * std::numbers::pi / 180.0;
};

/// Adds extent bounds for the free translation coordinates (and angle
/// intervals for interval rotation models) covering every sample.
NullspaceModel infer_bounds(const Demonstration& d, const NullspaceModel& model, const BoundsConfig& cfg = {});

struct Waypoint {
  double time = 0.0;
  std::vector<double> coordinates;  // manifold coordinates of the sample
  double parameter = 0.0;           // trajectory parameter (line s, unwrapped circle angle, tilt angle, path length)
  double arc_length = 0.0;          // cumulative |d parameter| from the start
};

struct TrajectoryOrdering {
  std::string parameter_name;  // "line", "circle", "angle" or "path"
  std::vector<Waypoint> waypoints;
  double start = 0.0;
  double end = 0.0;
};

/// Time-ordered waypoints with a monotone arc-length parameter. Throws
/// InvalidArgument ("not a trajectory") for discrete demonstrations.
TrajectoryOrdering order_trajectory(const Demonstration& d, const NullspaceModel& model);

}  // namespace skillspace
