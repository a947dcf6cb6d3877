#include "skillspace/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "skillspace/least_squares.hpp"
#include "skillspace/overloaded.hpp"
#include "skillspace/random.hpp"

namespace skillspace {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Vec3> positions(const Demonstration& d) {
  std::vector<Vec3> out;
  out.reserve(d.samples.size());
  for (const auto& s : d.samples) out.push_back(s.translation);
  return out;
}

std::vector<Vec3> body_axes(const Demonstration& d, AxisSelector sel) {
  std::vector<Vec3> out;
  out.reserve(d.samples.size());
  for (const auto& s : d.samples) out.push_back(constrained_axis(s.rotation, sel).vec());
  return out;
}

Vec3 centroid(const std::vector<Vec3>& pts) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

// Eigenvectors of the scatter matrix, columns sorted by ascending eigenvalue.
Mat3 scatter_axes(const std::vector<Vec3>& pts, const Vec3& c) {
  Mat3 cov = Mat3::Zero();
  for (const auto& p : pts) cov += (p - c) * (p - c).transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  return es.eigenvectors();
}

// Algebraic (Kasa) circle fit in 2-D. Exact on noiseless data.
struct Circle2 {
  Eigen::Vector2d center;
  double r;
  double rms;
};

std::optional<Circle2> kasa_fit(const std::vector<Eigen::Vector2d>& q) {
  if (q.size() < 3) return std::nullopt;
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d atb = Eigen::Vector3d::Zero();
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : q) mean += p;
  mean /= static_cast<double>(q.size());
  for (const auto& p0 : q) {
    const Eigen::Vector2d p = p0 - mean;
    const Eigen::Vector3d row(2.0 * p.x(), 2.0 * p.y(), 1.0);
    ata += row * row.transpose();
    atb += row * p.squaredNorm();
  }
  Eigen::FullPivLU<Eigen::Matrix3d> lu(ata);
  if (lu.rank() < 3) return std::nullopt;
  const Eigen::Vector3d sol = lu.solve(atb);
  const double r2 = sol[2] + sol.head<2>().squaredNorm();
  if (!(r2 > 0.0) || !sol.allFinite()) return std::nullopt;
  Circle2 out{sol.head<2>() + mean, std::sqrt(r2), 0.0};
  double sq = 0.0;
  for (const auto& p : q) sq += std::pow((p - out.center).norm() - out.r, 2);
  out.rms = std::sqrt(sq / static_cast<double>(q.size()));
  return out;
}

struct AxisCircle {
  Vec3 center;
  double r;
  double rms;
};

// Circle fit of the points projected along `axis`; center placed at the
// centroid's axial height.
std::optional<AxisCircle> circle_about_axis(const std::vector<Vec3>& pts, const UnitVec3& axis) {
  const auto [e1, e2] = plane_basis(axis);
  std::vector<Eigen::Vector2d> q;
  q.reserve(pts.size());
  for (const auto& p : pts) q.emplace_back(p.dot(e1), p.dot(e2));
  const auto c = kasa_fit(q);
  if (!c) return std::nullopt;
  const Vec3 center = c->center.x() * e1 + c->center.y() * e2 + centroid(pts).dot(axis.vec()) * axis.vec();
  return AxisCircle{center, c->r, c->rms};
}

std::vector<Vec3> hemisphere_directions(int n) {
  std::vector<Vec3> out;
  out.reserve(n);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (i + 0.5) / n;  // z in (0, 1)
    const double rad = std::sqrt(1.0 - z * z);
    const double t = golden * i;
    out.emplace_back(rad * std::cos(t), rad * std::sin(t), z);
  }
  return out;
}

struct Cap {
  Vec3 center;
  double angle;
};

bool cap_contains(const Cap& c, const Vec3& x) { return angle_between(c.center, x) <= c.angle + 1e-12; }

std::optional<Cap> cap_from(const Vec3& a, const Vec3& b) {
  const Vec3 m = a + b;
  if (m.norm() < 1e-12) return std::nullopt;
  return Cap{m.normalized(), 0.5 * angle_between(a, b)};
}

std::optional<Cap> cap_from(const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 n = (b - a).cross(c - a);
  if (n.norm() < 1e-14) return std::nullopt;
  n.normalize();
  if (n.dot(a) < 0.0) n = -n;
  return Cap{n, angle_between(n, a)};
}

// Smallest spherical cap containing unit vectors (Welzl, move-to-front free
// iterative form). Only meaningful when the points fit in a hemisphere.
std::optional<Cap> minimal_enclosing_cap(std::vector<Vec3> pts) {
  if (pts.empty()) return std::nullopt;
  Rng rng(0x5eed);
  for (std::size_t i = pts.size(); i > 1; --i) std::swap(pts[i - 1], pts[rng.next() % i]);

  Cap cap{pts[0], 0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (cap_contains(cap, pts[i])) continue;
    cap = Cap{pts[i], 0.0};
    for (std::size_t j = 0; j < i; ++j) {
      if (cap_contains(cap, pts[j])) continue;
      auto c2 = cap_from(pts[i], pts[j]);
      if (!c2) return std::nullopt;
      cap = *c2;
      for (std::size_t k = 0; k < j; ++k) {
        if (cap_contains(cap, pts[k])) continue;
        auto c3 = cap_from(pts[i], pts[j], pts[k]);
        if (!c3) return std::nullopt;
        cap = *c3;
      }
    }
  }
  return cap;
}

void normalize_block(Eigen::VectorXd& x, Eigen::Index at) {
  const double n = x.segment<3>(at).norm();
  if (n > 1e-300) x.segment<3>(at) /= n;
}

double fold_angle(double theta) {
  theta = std::fmod(std::abs(theta), 2.0 * kPi);
  return theta > kPi ? 2.0 * kPi - theta : theta;
}

Eigen::Vector4d quaternion_residual(const Rotation& projected, const Rotation& r) {
  const Eigen::Vector4d a = projected.wxyz(), b = r.wxyz();
  const Eigen::Vector4d minus = a - b, plus = a + b;
  return minus.squaredNorm() <= plus.squaredNorm() ? minus : plus;
}

Vec3 orient_like(const Vec3& v, const std::optional<Vec3>& reference) {
  if (reference) return v.dot(*reference) < 0.0 ? Vec3(-v) : v;
  Eigen::Index i;
  v.cwiseAbs().maxCoeff(&i);
  return v[i] < 0.0 ? Vec3(-v) : v;
}

struct TranslationFit {
  TranslationManifold manifold;
  bool converged = true;
  int iterations = 0;
  std::vector<double> costs;
};

struct RotationFit {
  RotationManifold manifold;
  bool converged = true;
  int iterations = 0;
  std::vector<double> costs;
  std::string rejected;  // non-empty when the model is inadmissible for the data
};

LeastSquaresOptions lm_options(const FitConfig& cfg) {
  LeastSquaresOptions o;
  o.max_iterations = cfg.max_iterations;
  o.step_tolerance = cfg.step_tolerance;
  o.gradient_tolerance = cfg.gradient_tolerance;
  return o;
}

void require_samples(const Demonstration& d, int needed, const std::string& what) {
  if (static_cast<int>(d.samples.size()) < needed) {
    throw Error(ErrorKind::InsufficientData, "insufficient data: " + what + " needs at least " +
                                                 std::to_string(needed) + " samples, got " +
                                                 std::to_string(d.samples.size()));
  }
}

TranslationFit fit_translation(const Demonstration& d, TranslationType t, const FitConfig& cfg) {
  TranslationFit out;
  const Eigen::VectorXd seed = init_params(d, t, cfg.selector);
  if (t == TranslationType::Full3Space || t == TranslationType::Point) {
    // Point: the centroid is the exact least-squares optimum.
    out.manifold = translation_from_params(t, seed);
    return out;
  }
  const std::vector<Vec3> pts = positions(d);
  const ResidualFunction f = [&](const Eigen::VectorXd& x) {
    const TranslationManifold m = translation_from_params(t, x);
    Eigen::VectorXd r(3 * pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) r.segment<3>(3 * i) = project_translation(m, pts[i]) - pts[i];
    return r;
  };
  const Retraction retract = [](Eigen::VectorXd& x) { normalize_block(x, 3); };
  const LeastSquaresReport rep = levenberg_marquardt(f, seed, lm_options(cfg), retract);
  out.manifold = translation_from_params(t, rep.x);
  out.converged = rep.converged;
  out.iterations = rep.iterations;
  out.costs = rep.cost_history;
  return out;
}

RotationFit fit_rotation(const Demonstration& d, RotationCandidate rc, const FitConfig& cfg) {
  RotationFit out;
  const Eigen::VectorXd seed = init_params(d, rc, cfg.selector);
  if (rc == RotationCandidate::FullSO3) {
    out.manifold = rotation_from_params(rc, seed, cfg.selector);
    return out;
  }
  if (rc == RotationCandidate::OneAngleInterval) {
    out.manifold = rotation_from_params(rc, seed, cfg.selector);
    if (seed[4] > cfg.max_interval_half_angle) {
      out.rejected = "angle interval wider than the admissible cone";
    }
    return out;
  }
  const std::vector<Pose>& samples = d.samples;
  const ResidualFunction f = [&](const Eigen::VectorXd& x) {
    const RotationManifold m = rotation_from_params(rc, x, cfg.selector);
    Eigen::VectorXd r(4 * samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      r.segment<4>(4 * i) = quaternion_residual(project_rotation(m, samples[i].rotation), samples[i].rotation);
    }
    return r;
  };
  const Retraction retract = [rc](Eigen::VectorXd& x) {
    normalize_block(x, 0);
    if (rc == RotationCandidate::OneAngle) x[3] = fold_angle(x[3]);
  };
  const LeastSquaresReport rep = levenberg_marquardt(f, seed, lm_options(cfg), retract);
  out.manifold = rotation_from_params(rc, rep.x, cfg.selector);
  out.converged = rep.converged;
  out.iterations = rep.iterations;
  out.costs = rep.cost_history;
  return out;
}

std::optional<Vec3> fixed_vector(const RotationManifold& m) {
  if (const auto* p = std::get_if<OneParallel>(&m.form)) return p->vf.vec();
  if (const auto* a = std::get_if<OneAngle>(&m.form)) return a->vf.vec();
  return std::nullopt;
}

// Canonical representative modulo parameterization symmetries: axis signs and
// the base point of lines, planes and cylinders.
TranslationManifold canonical(TranslationManifold m, const Demonstration& d, const std::optional<Vec3>& reference) {
  const Vec3 c = centroid(positions(d));
  std::visit(Overloaded{
                 [](Full3Space&) {},
                 [](PointManifold&) {},
                 [&](LineManifold& l) {
                   l.a = UnitVec3::normalized(orient_like(l.a.vec(), reference));
                   l.p = l.p + (c - l.p).dot(l.a.vec()) * l.a.vec();
                 },
                 [&](CircleManifold& ci) { ci.n = UnitVec3::normalized(orient_like(ci.n.vec(), reference)); },
                 [&](PlaneManifold& p) {
                   p.n = UnitVec3::normalized(orient_like(p.n.vec(), reference));
                   p.p = c + (p.p - c).dot(p.n.vec()) * p.n.vec();
                 },
                 [&](CylinderManifold& cy) {
                   cy.a = UnitVec3::normalized(orient_like(cy.a.vec(), reference));
                   cy.p = cy.p + (c - cy.p).dot(cy.a.vec()) * cy.a.vec();
                 },
             },
             m.form);
  return m;
}

FitResult assemble(const Demonstration& d, const TranslationFit& tf, const RotationFit& rf, const FitConfig& cfg) {
  FitResult out;
  out.model.translation = canonical(tf.manifold, d, fixed_vector(rf.manifold));
  out.model.rotation = rf.manifold;
  out.residuals = combined_residuals(d, out.model, cfg.lambda);
  out.rms = rms(out.residuals);
  out.model.rms_fit_residual = out.rms;
  out.converged = tf.converged && rf.converged;
  out.iterations = tf.iterations + rf.iterations;
  out.cost_history = tf.costs;
  out.cost_history.insert(out.cost_history.end(), rf.costs.begin(), rf.costs.end());
  return out;
}

int translation_index(TranslationType t) { return static_cast<int>(t); }
int rotation_index(RotationCandidate r) { return static_cast<int>(r); }

std::vector<double> angles_to(const std::vector<Vec3>& axes, const Vec3& vf) {
  std::vector<double> out;
  out.reserve(axes.size());
  for (const auto& a : axes) out.push_back(angle_between(a, vf));
  return out;
}

// Smallest wrapped interval containing all angles.
Interval polar_interval(std::vector<double> a) {
  std::sort(a.begin(), a.end());
  const std::size_t n = a.size();
  double best_gap = a.front() + 2.0 * kPi - a.back();
  Interval iv{a.front(), a.back()};
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double gap = a[i + 1] - a[i];
    if (gap > best_gap) {
      best_gap = gap;
      iv = {a[i + 1], a[i] + 2.0 * kPi};
    }
  }
  return iv;
}

double wrap_pi(double x) {
  x = std::fmod(x + kPi, 2.0 * kPi);
  if (x < 0.0) x += 2.0 * kPi;
  return x - kPi;
}

}  // namespace

std::string to_string(DemonstrationKind k) { return k == DemonstrationKind::Discrete ? "discrete" : "continuous"; }

DemonstrationKind demonstration_kind_from_string(const std::string& s) {
  if (s == "discrete") return DemonstrationKind::Discrete;
  if (s == "continuous") return DemonstrationKind::Continuous;
  throw Error(ErrorKind::Parse, "unknown demonstration kind '" + s + "'");
}

void validate(const Demonstration& d) {
  if (d.samples.empty()) throw Error(ErrorKind::InvalidArgument, "demonstration has no samples");
  if (d.kind == DemonstrationKind::Continuous) {
    for (const auto& s : d.samples) {
      if (!s.timestamp) throw Error(ErrorKind::InvalidArgument, "continuous demonstration sample lacks a timestamp");
    }
  }
}

std::string to_string(RotationCandidate c) {
  switch (c) {
    case RotationCandidate::OneParallel: return "oneparallel";
    case RotationCandidate::OneAngle: return "oneangle";
    case RotationCandidate::OneAngleInterval: return "oneangle-interval";
    case RotationCandidate::FullSO3: return "so3";
  }
  return "?";
}

int dimension(RotationCandidate c) {
  switch (c) {
    case RotationCandidate::OneParallel: return 1;
    case RotationCandidate::OneAngle: return 2;
    case RotationCandidate::OneAngleInterval:
    case RotationCandidate::FullSO3: return 3;
  }
  return 3;
}

std::string to_string(const ModelCandidate& c) { return to_string(c.translation) + "+" + to_string(c.rotation); }

void validate(const FitConfig& cfg) {
  if (!(cfg.tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be positive");
  if (!(cfg.lambda >= 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be non-negative");
  if (cfg.max_iterations < 1) throw Error(ErrorKind::InvalidArgument, "max_iterations must be at least 1");
}

int min_samples(TranslationType t) {
  switch (t) {
    case TranslationType::Point: return 1;
    case TranslationType::Line: return 2;
    case TranslationType::Circle:
    case TranslationType::Plane: return 3;
    case TranslationType::Cylinder: return 5;
    case TranslationType::Full3Space: return 1;
  }
  return 1;
}

int min_samples(RotationCandidate r) {
  switch (r) {
    case RotationCandidate::OneParallel: return 1;
    case RotationCandidate::OneAngle: return 3;
    case RotationCandidate::OneAngleInterval: return 2;
    case RotationCandidate::FullSO3: return 1;
  }
  return 1;
}

Eigen::VectorXd init_params(const Demonstration& d, TranslationType t, AxisSelector selector) {
  require_samples(d, min_samples(t), to_string(t));
  const std::vector<Vec3> pts = positions(d);
  const Vec3 c = centroid(pts);
  Eigen::VectorXd x;
  switch (t) {
    case TranslationType::Full3Space: return Eigen::VectorXd(0);
    case TranslationType::Point: return c;
    case TranslationType::Line: {
      x.resize(6);
      x << c, scatter_axes(pts, c).col(2);
      return x;
    }
    case TranslationType::Plane: {
      x.resize(6);
      x << c, scatter_axes(pts, c).col(0);
      return x;
    }
    case TranslationType::Circle: {
      const UnitVec3 n = UnitVec3::normalized(scatter_axes(pts, c).col(0));
      const auto fit = circle_about_axis(pts, n);
      if (!fit) throw Error(ErrorKind::InsufficientData, "insufficient data: circle samples are collinear");
      x.resize(7);
      x << fit->center, n.vec(), fit->r;
      return x;
    }
    case TranslationType::Cylinder: {
      std::vector<Vec3> dirs;
      const std::vector<Vec3> axes = body_axes(d, selector);
      const Vec3 mean_axis = centroid(axes);
      if (mean_axis.norm() > 0.5) dirs.push_back(mean_axis.normalized());
      const Mat3 ev = scatter_axes(pts, c);
      for (int i = 2; i >= 0; --i) dirs.push_back(ev.col(i));
      for (const auto& v : hemisphere_directions(400)) dirs.push_back(v);

      std::optional<AxisCircle> best;
      Vec3 best_dir = Vec3::UnitZ();
      for (const auto& dir : dirs) {
        const auto fit = circle_about_axis(pts, UnitVec3::normalized(dir));
        if (fit && (!best || fit->rms < best->rms - 1e-15)) {
          best = fit;
          best_dir = dir.normalized();
        }
      }
      if (!best) throw Error(ErrorKind::InsufficientData, "insufficient data: no cylinder axis fits the samples");
      x.resize(7);
      x << best->center, best_dir, best->r;
      return x;
    }
  }
  return x;
}

Eigen::VectorXd init_params(const Demonstration& d, RotationCandidate r, AxisSelector selector) {
  require_samples(d, min_samples(r), to_string(r));
  const std::vector<Vec3> axes = body_axes(d, selector);
  const Vec3 mean = centroid(axes);
  Eigen::VectorXd x;
  switch (r) {
    case RotationCandidate::FullSO3: return Eigen::VectorXd(0);
    case RotationCandidate::OneParallel: {
      x = mean.norm() > 1e-9 ? Vec3(mean.normalized()) : axes.front();
      return x;
    }
    case RotationCandidate::OneAngle: {
      // Axis tips of a cone lie on a plane whose normal is the cone axis.
      Vec3 vf = scatter_axes(axes, mean).col(0);
      if (vf.dot(mean) < 0.0) vf = -vf;
      double theta = 0.0;
      for (const auto& a : axes) theta += angle_between(a, vf);
      x.resize(4);
      x << vf, theta / static_cast<double>(axes.size());
      return x;
    }
    case RotationCandidate::OneAngleInterval: {
      const auto cap = minimal_enclosing_cap(axes);
      Vec3 vf = cap ? cap->center : (mean.norm() > 1e-9 ? Vec3(mean.normalized()) : axes.front());
      const std::vector<double> ang = angles_to(axes, vf);
      const double lo = *std::min_element(ang.begin(), ang.end());
      const double hi = cap ? *std::max_element(ang.begin(), ang.end()) : kPi;
      x.resize(5);
      x << vf, lo, hi;
      return x;
    }
  }
  return x;
}

TranslationManifold translation_from_params(TranslationType t, const Eigen::VectorXd& x) {
  const auto dir = [&](Eigen::Index at) { return UnitVec3::normalized(x.segment<3>(at)); };
  const auto radius = [&](double r) { return std::max(std::abs(r), 1e-12); };
  TranslationManifold m;
  switch (t) {
    case TranslationType::Full3Space: m.form = Full3Space{}; break;
    case TranslationType::Point: m.form = PointManifold{x.head<3>()}; break;
    case TranslationType::Line: m.form = LineManifold{x.head<3>(), dir(3)}; break;
    case TranslationType::Plane: m.form = PlaneManifold{x.head<3>(), dir(3)}; break;
    case TranslationType::Circle: m.form = CircleManifold{x.head<3>(), dir(3), radius(x[6])}; break;
    case TranslationType::Cylinder: m.form = CylinderManifold{x.head<3>(), dir(3), radius(x[6])}; break;
  }
  return m;
}

RotationManifold rotation_from_params(RotationCandidate r, const Eigen::VectorXd& x, AxisSelector selector) {
  RotationManifold m;
  m.selector = selector;
  switch (r) {
    case RotationCandidate::FullSO3: m.form = FullSO3{}; break;
    case RotationCandidate::OneParallel: m.form = OneParallel{UnitVec3::normalized(x.head<3>())}; break;
    case RotationCandidate::OneAngle: m.form = OneAngle{UnitVec3::normalized(x.head<3>()), fold_angle(x[3]), {}}; break;
    case RotationCandidate::OneAngleInterval: {
      const Interval iv{std::clamp(x[3], 0.0, kPi), std::clamp(x[4], 0.0, kPi)};
      m.form = OneAngle{UnitVec3::normalized(x.head<3>()), 0.5 * (iv.lo + iv.hi), iv};
      break;
    }
  }
  return m;
}

std::vector<double> combined_residuals(const Demonstration& d, const NullspaceModel& m, double lambda) {
  std::vector<double> out;
  out.reserve(d.samples.size());
  for (const auto& s : d.samples) out.push_back(dist_t(m.translation, s.translation) + lambda * dist_r(m.rotation, s.rotation));
  return out;
}

double rms(const std::vector<double>& residuals) {
  if (residuals.empty()) return 0.0;
  double sq = 0.0;
  for (double r : residuals) sq += r * r;
  return std::sqrt(sq / static_cast<double>(residuals.size()));
}

FitResult fit_manifold(const Demonstration& d, const ModelCandidate& candidate, const FitConfig& cfg) {
  validate(d);
  validate(cfg);
  const TranslationFit tf = fit_translation(d, candidate.translation, cfg);
  const RotationFit rf = fit_rotation(d, candidate.rotation, cfg);
  FitResult out = assemble(d, tf, rf, cfg);
  if (!rf.rejected.empty()) out.converged = false;
  return out;
}

std::vector<ModelCandidate> candidate_order(const FitConfig& cfg) {
  std::vector<ModelCandidate> out;
  for (auto t : cfg.translation_candidates) {
    for (auto r : cfg.rotation_candidates) {
      if (t == TranslationType::Full3Space && r == RotationCandidate::FullSO3) continue;
      out.push_back({t, r});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const ModelCandidate& a, const ModelCandidate& b) {
    const auto key = [](const ModelCandidate& c) {
      return std::tuple{dimension(c.translation) + dimension(c.rotation), rotation_index(c.rotation),
                        translation_index(c.translation)};
    };
    return key(a) < key(b);
  });
  return out;
}

SelectionReport select_model_report(const Demonstration& d, const FitConfig& cfg) {
  validate(d);
  validate(cfg);
  SelectionReport report;

  std::map<TranslationType, std::optional<TranslationFit>> tfits;
  std::map<TranslationType, std::string> tnotes;
  for (auto t : cfg.translation_candidates) {
    try {
      tfits[t] = fit_translation(d, t, cfg);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InsufficientData) throw;
      tfits[t] = std::nullopt;
      tnotes[t] = e.what();
    }
  }
  std::map<RotationCandidate, std::optional<RotationFit>> rfits;
  std::map<RotationCandidate, std::string> rnotes;
  for (auto r : cfg.rotation_candidates) {
    try {
      rfits[r] = fit_rotation(d, r, cfg);
      if (!rfits[r]->rejected.empty()) rnotes[r] = rfits[r]->rejected;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InsufficientData) throw;
      rfits[r] = std::nullopt;
      rnotes[r] = e.what();
    }
  }

  for (const auto& c : candidate_order(cfg)) {
    CandidateReport cr;
    cr.candidate = c;
    const auto& tf = tfits[c.translation];
    const auto& rf = rfits[c.rotation];
    if (!tf) {
      cr.note = tnotes[c.translation];
    } else if (!rf || !rf->rejected.empty()) {
      cr.note = rnotes[c.rotation];
    } else {
      FitResult fr = assemble(d, *tf, *rf, cfg);
      cr.rms = fr.rms;
      cr.passed = fr.rms <= cfg.tau;
      if (cr.passed && !report.chosen) {
        report.chosen = report.candidates.size();
        report.result = std::move(fr);
      }
    }
    report.candidates.push_back(std::move(cr));
  }

  if (!report.chosen) {
    FitResult fallback;
    fallback.model.translation.form = Full3Space{};
    fallback.model.rotation.form = FullSO3{};
    fallback.model.rotation.selector = cfg.selector;
    fallback.residuals = combined_residuals(d, fallback.model, cfg.lambda);
    fallback.rms = rms(fallback.residuals);
    fallback.converged = false;
    report.result = std::move(fallback);
  }
  return report;
}

FitResult select_model(const Demonstration& d, const FitConfig& cfg) { return select_model_report(d, cfg).result; }

NullspaceModel infer_bounds(const Demonstration& d, const NullspaceModel& model, const BoundsConfig& cfg) {
  validate(d);
  NullspaceModel out = model;
  const TranslationType t = model.translation.type();

  std::vector<std::vector<double>> coords;
  coords.reserve(d.samples.size());
  for (const auto& s : d.samples) coords.push_back(coordinates(model.translation, s.translation));

  const auto linear_interval = [&](std::size_t dim) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& c : coords) lo = std::min(lo, c[dim]), hi = std::max(hi, c[dim]);
    const double m = cfg.margin_fraction * (hi - lo);
    return Interval{lo - m, hi + m};
  };
  const auto angular_interval = [&](std::size_t dim) {
    std::vector<double> a;
    for (const auto& c : coords) a.push_back(c[dim]);
    Interval iv = polar_interval(a);
    const double m = cfg.margin_fraction * iv.width();
    if (iv.width() + 2.0 * m >= 2.0 * kPi) return Interval{-kPi, kPi};
    return Interval{iv.lo - m, iv.hi + m};
  };

  switch (t) {
    case TranslationType::Point: out.translation.bounds.reset(); break;
    case TranslationType::Line: out.translation.bounds = ExtentBounds{{linear_interval(0)}}; break;
    case TranslationType::Circle: out.translation.bounds = ExtentBounds{{angular_interval(0)}}; break;
    case TranslationType::Plane: out.translation.bounds = ExtentBounds{{linear_interval(0), linear_interval(1)}}; break;
    case TranslationType::Cylinder: out.translation.bounds = ExtentBounds{{linear_interval(0)}}; break;
    case TranslationType::Full3Space:
      out.translation.bounds = ExtentBounds{{linear_interval(0), linear_interval(1), linear_interval(2)}};
      break;
  }

  if (auto* a = std::get_if<OneAngle>(&out.rotation.form); a && a->interval) {
    const std::vector<double> ang = angles_to(body_axes(d, model.rotation.selector), a->vf.vec());
    const double lo = *std::min_element(ang.begin(), ang.end());
    const double hi = *std::max_element(ang.begin(), ang.end());
    const double m = std::min(cfg.margin_fraction * (hi - lo), cfg.angle_margin_cap);
    a->interval = Interval{std::max(0.0, lo - m), std::min(kPi, hi + m)};
    a->theta = 0.5 * (a->interval->lo + a->interval->hi);
  }
  return out;
}

TrajectoryOrdering order_trajectory(const Demonstration& d, const NullspaceModel& model) {
  if (d.kind != DemonstrationKind::Continuous) throw Error(ErrorKind::InvalidArgument, "not a trajectory");
  validate(d);

  std::vector<std::size_t> order(d.samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return *d.samples[a].timestamp < *d.samples[b].timestamp; });

  TrajectoryOrdering out;
  const TranslationType t = model.translation.type();
  const auto* angle_model = std::get_if<OneAngle>(&model.rotation.form);
  if (t == TranslationType::Line) {
    out.parameter_name = "line";
  } else if (t == TranslationType::Circle) {
    out.parameter_name = "circle";
  } else if (t == TranslationType::Point && angle_model) {
    out.parameter_name = "angle";
  } else {
    out.parameter_name = "path";
  }

  std::optional<Vec3> previous_point;
  double previous_parameter = 0.0;
  double arc = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Pose& s = d.samples[order[k]];
    Waypoint w;
    w.time = *s.timestamp;
    w.coordinates = coordinates(model.translation, s.translation);
    const Vec3 on_manifold = project_translation(model.translation, s.translation);
    if (out.parameter_name == "line") {
      w.parameter = w.coordinates[0];
    } else if (out.parameter_name == "circle") {
      w.parameter = k == 0 ? w.coordinates[0] : previous_parameter + wrap_pi(w.coordinates[0] - wrap_pi(previous_parameter));
    } else if (out.parameter_name == "angle") {
      w.parameter = angle_between(constrained_axis(s.rotation, model.rotation.selector), angle_model->vf);
    } else {
      w.parameter = k == 0 ? 0.0 : previous_parameter + (on_manifold - *previous_point).norm();
    }
    const double step = k == 0 ? 0.0 : std::abs(w.parameter - previous_parameter);
    arc += step;
    w.arc_length = arc;
    previous_point = on_manifold;
    previous_parameter = w.parameter;
    if (k > 0 && step <= 1e-12) continue;  // collapse stationary samples
    out.waypoints.push_back(std::move(w));
  }
  out.start = out.waypoints.front().parameter;
  out.end = out.waypoints.back().parameter;
  return out;
}

}  // namespace skillspace
