#include "skillspace/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace skillspace {

namespace {

double wrap_pi(double x) { return std::remainder(x, 2.0 * std::numbers::pi); }

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int k = 0; k < n; ++k) v.push_back(n == 1 ? a : a + (b - a) * k / (n - 1));
  return v;
}

double centre(const Interval& i) { return 0.5 * (i.lo + i.hi); }

// Bounds of `from` re-expressed around the same centre point on `to`.
std::optional<ExtentBounds> rebase_bounds(const TranslationManifold& from, const TranslationManifold& to) {
  if (!from.bounds || from.bounds->dims.empty()) return std::nullopt;
  const auto& dims = from.bounds->dims;
  std::vector<double> c;
  for (const auto& d : dims) c.push_back(centre(d));
  if (coordinates(from, Vec3::Zero()).size() != c.size()) return from.bounds;
  const std::vector<double> c2 = coordinates(to, point_at(from, c));
  if (c2.size() != c.size()) return std::nullopt;
  ExtentBounds out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double half = 0.5 * dims[i].width();
    out.dims.push_back({c2[i] - half, c2[i] + half});
  }
  return out;
}

std::optional<TrajectorySpec> rebase_trajectory(const TrajectorySpec& t, const NullspaceModel& from,
                                                const NullspaceModel& to) {
  TrajectorySpec out{t.parameter, {}};
  if (t.parameter == "angle") {
    const auto* a = std::get_if<OneAngle>(&from.rotation.form);
    const auto* b = std::get_if<OneAngle>(&to.rotation.form);
    if (!a || !b) return std::nullopt;
    const bool flipped = a->vf.dot(b->vf.vec()) < 0.0;
    for (double v : t.values) out.values.push_back(flipped ? std::numbers::pi - v : v);
    return out;
  }
  if (from.translation.type() != to.translation.type()) return std::nullopt;
  for (double v : t.values) {
    double x = coordinates(to.translation, point_at(from.translation, {v})).at(0);
    if (t.parameter == "circle" && !out.values.empty()) x = out.values.back() + wrap_pi(x - out.values.back());
    out.values.push_back(x);
  }
  return out;
}

}  // namespace

SkillFile fit_skill(const Demonstration& d, const FitOptions& options) {
  validate(d);
  if (options.waypoints < 2 && d.kind == DemonstrationKind::Continuous)
    throw Error(ErrorKind::InvalidArgument, "a trajectory needs at least 2 waypoints");
  const SelectionReport report = select_model_report(d, options.config);

  SkillFile out;
  SkillModel& s = out.skill;
  s.name = options.name.empty() ? "skill" : options.name;
  s.kind = d.kind;
  s.fixed_object = d.fixed_label;
  s.constrained_object = d.constrained_label;
  s.nullspace = infer_bounds(d, report.result.model, options.bounds);

  if (d.kind == DemonstrationKind::Continuous) {
    const TrajectoryOrdering ord = order_trajectory(d, s.nullspace);
    if (ord.parameter_name != "path") {
      std::vector<double> values = linspace(ord.start, ord.end, options.waypoints);
      if (ord.parameter_name == "circle")
        for (double& v : values) v = wrap_pi(v);
      s.trajectory = TrajectorySpec{ord.parameter_name, std::move(values)};
    }
  }

  FitSummary f;
  f.candidates = report.candidates;
  f.chosen = report.chosen;
  f.rms = report.result.rms;
  f.converged = report.result.converged;
  f.residuals = report.result.residuals;
  f.cost_history = report.result.cost_history;
  out.fit = std::move(f);
  return out;
}

InferResult infer_skill(const SkillModel& fitted, const Scene& scene, MatchOptions options) {
  validate(scene);
  if (!scene.has_object(fitted.fixed_object))
    throw Error(ErrorKind::InvalidArgument, "scene has no object '" + fitted.fixed_object + "'");
  if (options.fixed_object.empty()) options.fixed_object = fitted.fixed_object;
  if (options.constrained_object.empty()) options.constrained_object = fitted.constrained_object;

  const Pose fixed = scene.object(fitted.fixed_object).pose;
  InferResult out;
  out.skill = fitted;
  out.hypotheses = map_to_constraints(transformed(fitted.nullspace, fixed), scene, options);
  if (out.hypotheses.empty()) return out;

  SkillModel& s = out.skill;
  s.scene = scene;
  s.constraints = out.hypotheses.front().constraints;
  NullspaceModel n =
      transformed(combined_nullspace(s.constraints, scene, fitted.nullspace.rotation.selector), fixed.inverse());
  if (!n.translation.bounds) n.translation.bounds = rebase_bounds(fitted.nullspace.translation, n.translation);
  n.rms_fit_residual = fitted.nullspace.rms_fit_residual;
  if (fitted.trajectory) {
    s.trajectory = rebase_trajectory(*fitted.trajectory, fitted.nullspace, n);
    if (!s.trajectory) s.kind = DemonstrationKind::Discrete;
  }
  s.nullspace = std::move(n);
  return out;
}

SkillModel edit_skill(const SkillModel& s, const std::string& param, double value) {
  if (s.parameters.count(param)) return edit_parameter(s, param, value);
  const std::string prefix = "constraint";
  const auto dot = param.find('.');
  std::size_t index = 0;
  if (param.rfind(prefix, 0) == 0 && dot != std::string::npos && dot > prefix.size()) {
    try {
      index = std::stoul(param.substr(prefix.size(), dot - prefix.size()));
    } catch (const std::exception&) {
      index = 0;
    }
  }
  if (index == 0 || index > s.constraints.size())
    throw Error(ErrorKind::InvalidArgument, "unknown parameter '" + param + "'");
  if (!std::isfinite(value)) throw Error(ErrorKind::InvalidArgument, "parameter value must be finite");

  SkillModel out = s;
  GeometricConstraint& c = out.constraints[index - 1];
  const std::string field = param.substr(dot + 1);
  if (field == "value" && c.value) {
    c.value = value;
  } else if ((field == "lo" || field == "hi") && c.interval) {
    (field == "lo" ? c.interval->lo : c.interval->hi) = value;
    if (c.interval->lo > c.interval->hi) throw Error(ErrorKind::InvalidArgument, "interval lo exceeds hi");
  } else {
    throw Error(ErrorKind::InvalidArgument, "constraint " + std::to_string(index) + " has no field '" + field + "'");
  }

  const Pose fixed = s.scene.object(s.fixed_object).pose;
  NullspaceModel n =
      transformed(combined_nullspace(out.constraints, s.scene, s.nullspace.rotation.selector), fixed.inverse());
  const NullspaceModel before = transformed(combined_nullspace(s.constraints, s.scene, s.nullspace.rotation.selector),
                                            fixed.inverse());
  // Bounds that came from the demonstration rather than the constraints.
  if (!n.translation.bounds && !before.translation.bounds && n.translation.type() == s.nullspace.translation.type())
    n.translation.bounds = rebase_bounds(s.nullspace.translation, n.translation);
  n.rms_fit_residual = s.nullspace.rms_fit_residual;
  validate(n.translation);
  validate(n.rotation);
  out.nullspace = std::move(n);
  return out;
}

}  // namespace skillspace
