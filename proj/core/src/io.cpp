#include "skillspace/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json_convert.hpp"
#include "skillspace/overloaded.hpp"

namespace skillspace {

namespace detail {

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::Parse, "expected a 3-vector, got " + j.dump());
  return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

UnitVec3 unit_from(const json& j) {
  const Vec3 v = vec_from(j);
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > 1e-6)
    throw Error(ErrorKind::Parse, "direction " + j.dump() + " is not unit-norm within 1e-6");
  return std::abs(v.norm() - 1.0) <= 1e-9 ? UnitVec3::checked(v) : UnitVec3::normalized(v);
}

json interval_json(const Interval& i) { return json::array({i.lo, i.hi}); }

Interval interval_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorKind::Parse, "expected [lo, hi], got " + j.dump());
  Interval i{j.at(0).get<double>(), j.at(1).get<double>()};
  if (i.lo > i.hi) throw Error(ErrorKind::Parse, "interval " + j.dump() + " has lo > hi");
  return i;
}

// Infinity has no JSON literal; it is written as null.
json number_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number_from(const json& j) { return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>(); }

json shape_json(const Shape& s) {
  json j{{"name", s.name}, {"kind", to_string(s.kind())}};
  std::visit(Overloaded{
                 [&](const PointShape& g) { j["p"] = vec_json(g.p); },
                 [&](const LineShape& g) { j["p"] = vec_json(g.p), j["a"] = vec_json(g.a); },
                 [&](const PlaneShape& g) { j["p"] = vec_json(g.p), j["n"] = vec_json(g.n); },
                 [&](const CircleShape& g) { j["p"] = vec_json(g.p), j["n"] = vec_json(g.n), j["r"] = g.r; },
                 [&](const CylinderShape& g) {
                   j["p"] = vec_json(g.p), j["a"] = vec_json(g.a), j["r"] = g.r, j["h"] = g.h;
                 },
             },
             s.geometry);
  return j;
}

Shape shape_from(const json& j, const std::string& owner) {
  Shape s;
  s.owner = owner;
  s.name = j.at("name").get<std::string>();
  switch (shape_kind_from_string(j.at("kind").get<std::string>())) {
    case ShapeKind::Point: s.geometry = PointShape{vec_from(j.at("p"))}; break;
    case ShapeKind::Line: s.geometry = LineShape{vec_from(j.at("p")), unit_from(j.at("a"))}; break;
    case ShapeKind::Plane: s.geometry = PlaneShape{vec_from(j.at("p")), unit_from(j.at("n"))}; break;
    case ShapeKind::Circle:
      s.geometry = CircleShape{vec_from(j.at("p")), unit_from(j.at("n")), j.at("r").get<double>()};
      break;
    case ShapeKind::Cylinder:
      s.geometry =
          CylinderShape{vec_from(j.at("p")), unit_from(j.at("a")), j.at("r").get<double>(), j.at("h").get<double>()};
      break;
  }
  return s;
}

json translation_json(const TranslationManifold& m) {
  json j{{"type", to_string(m.type())}};
  std::visit(Overloaded{
                 [&](const Full3Space& f) {
                   if (f.slab)
                     j["slab"] = {{"p", vec_json(f.slab->p)}, {"n", vec_json(f.slab->n)},
                                  {"offset", interval_json(f.slab->offset)}};
                 },
                 [&](const PointManifold& f) { j["p"] = vec_json(f.p); },
                 [&](const LineManifold& f) { j["p"] = vec_json(f.p), j["a"] = vec_json(f.a); },
                 [&](const CircleManifold& f) { j["p"] = vec_json(f.p), j["n"] = vec_json(f.n), j["r"] = f.r; },
                 [&](const PlaneManifold& f) { j["p"] = vec_json(f.p), j["n"] = vec_json(f.n); },
                 [&](const CylinderManifold& f) { j["p"] = vec_json(f.p), j["a"] = vec_json(f.a), j["r"] = f.r; },
             },
             m.form);
  if (m.bounds) {
    json dims = json::array();
    for (const auto& d : m.bounds->dims) dims.push_back(interval_json(d));
    j["bounds"] = dims;
  }
  return j;
}

TranslationManifold translation_from(const json& j) {
  TranslationManifold m;
  switch (translation_type_from_string(j.at("type").get<std::string>())) {
    case TranslationType::Full3Space: {
      Full3Space f;
      if (j.contains("slab")) {
        const json& s = j.at("slab");
        f.slab = Full3Space::Slab{vec_from(s.at("p")), unit_from(s.at("n")), interval_from(s.at("offset"))};
      }
      m.form = f;
      break;
    }
    case TranslationType::Point: m.form = PointManifold{vec_from(j.at("p"))}; break;
    case TranslationType::Line: m.form = LineManifold{vec_from(j.at("p")), unit_from(j.at("a"))}; break;
    case TranslationType::Circle:
      m.form = CircleManifold{vec_from(j.at("p")), unit_from(j.at("n")), j.at("r").get<double>()};
      break;
    case TranslationType::Plane: m.form = PlaneManifold{vec_from(j.at("p")), unit_from(j.at("n"))}; break;
    case TranslationType::Cylinder:
      m.form = CylinderManifold{vec_from(j.at("p")), unit_from(j.at("a")), j.at("r").get<double>()};
      break;
  }
  if (j.contains("bounds")) {
    ExtentBounds b;
    for (const auto& d : j.at("bounds")) b.dims.push_back(interval_from(d));
    m.bounds = b;
  }
  return m;
}

json rotation_json(const RotationManifold& m) {
  json j{{"type", to_string(m.type())}, {"selector", to_string(m.selector)}};
  std::visit(Overloaded{
                 [](const FullSO3&) {},
                 [&](const OneParallel& r) { j["vf"] = vec_json(r.vf); },
                 [&](const OneAngle& r) {
                   j["vf"] = vec_json(r.vf);
                   j["theta"] = r.theta;
                   if (r.interval) j["interval"] = interval_json(*r.interval);
                 },
             },
             m.form);
  return j;
}

RotationManifold rotation_from(const json& j) {
  RotationManifold m;
  m.selector = axis_selector_from_string(j.value("selector", std::string("+z")));
  switch (rotation_type_from_string(j.at("type").get<std::string>())) {
    case RotationType::FullSO3: m.form = FullSO3{}; break;
    case RotationType::OneParallel: m.form = OneParallel{unit_from(j.at("vf"))}; break;
    case RotationType::OneAngle: {
      OneAngle a{unit_from(j.at("vf")), j.at("theta").get<double>(), std::nullopt};
      if (j.contains("interval")) a.interval = interval_from(j.at("interval"));
      m.form = a;
      break;
    }
  }
  return m;
}

json ref_json(const ShapeRef& r) { return {{"object", r.object}, {"name", r.name}, {"kind", to_string(r.kind)}}; }

ShapeRef ref_from(const json& j) {
  return {j.at("object").get<std::string>(), j.at("name").get<std::string>(),
          shape_kind_from_string(j.at("kind").get<std::string>())};
}

json constraint_json(const GeometricConstraint& c) {
  json j{{"fixed", ref_json(c.fixed)}, {"constrained", ref_json(c.constrained)}, {"relation", to_string(c.relation)}};
  if (c.value) j["value"] = *c.value;
  if (c.interval) j["interval"] = interval_json(*c.interval);
  return j;
}

GeometricConstraint constraint_from(const json& j) {
  GeometricConstraint c;
  c.fixed = ref_from(j.at("fixed"));
  c.constrained = ref_from(j.at("constrained"));
  c.relation = relation_from_string(j.at("relation").get<std::string>());
  if (j.contains("value")) c.value = j.at("value").get<double>();
  if (j.contains("interval")) c.interval = interval_from(j.at("interval"));
  return c;
}

json scene_json(const Scene& s) {
  json objects = json::array();
  for (const auto& o : s.objects) {
    json shapes = json::array();
    for (const auto& sh : o.shapes) shapes.push_back(shape_json(sh));
    objects.push_back({{"name", o.name}, {"pose", pose_json(o.pose)}, {"shapes", shapes}});
  }
  return {{"units", {{"length", "m"}, {"angle", "rad"}}}, {"objects", objects}};
}

void check_units(const json& j) {
  if (!j.contains("units")) return;
  const json& u = j.at("units");
  if (u.value("length", "m") != "m" || u.value("angle", "rad") != "rad")
    throw Error(ErrorKind::Parse, "only meters and radians are supported, got units " + u.dump());
}

Scene scene_from(const json& j) {
  check_units(j);
  Scene s;
  for (const auto& o : j.at("objects")) {
    SceneObject so;
    so.name = o.at("name").get<std::string>();
    so.pose = pose_from(o.at("pose"));
    for (const auto& sh : o.at("shapes")) so.shapes.push_back(shape_from(sh, so.name));
    s.objects.push_back(std::move(so));
  }
  validate(s);
  return s;
}

json candidate_json(const CandidateReport& c) {
  return {{"translation", to_string(c.candidate.translation)},
          {"rotation", to_string(c.candidate.rotation)},
          {"rms", number_json(c.rms)},
          {"passed", c.passed},
          {"note", c.note}};
}

RotationCandidate rotation_candidate_from_string(const std::string& s) {
  for (auto r : {RotationCandidate::OneParallel, RotationCandidate::OneAngle, RotationCandidate::OneAngleInterval,
                 RotationCandidate::FullSO3})
    if (to_string(r) == s) return r;
  throw Error(ErrorKind::Parse, "unknown rotation candidate '" + s + "'");
}

CandidateReport candidate_from(const json& j) {
  CandidateReport c;
  c.candidate.translation = translation_type_from_string(j.at("translation").get<std::string>());
  c.candidate.rotation = rotation_candidate_from_string(j.at("rotation").get<std::string>());
  c.rms = number_from(j.at("rms"));
  c.passed = j.at("passed").get<bool>();
  c.note = j.value("note", std::string());
  return c;
}

json residual_json(const ResidualEntry& e) { return {{"tier", e.tier}, {"name", e.name}, {"value", e.value}}; }

json solve_json(const SolveResult& r) {
  json residuals = json::array();
  for (const auto& e : r.residuals) residuals.push_back(residual_json(e));
  return {{"q", std::vector<double>(r.q.data(), r.q.data() + r.q.size())},
          {"end_effector", pose_json(r.end_effector)},
          {"converged", r.converged},
          {"iterations", r.iterations},
          {"attempts", r.attempts},
          {"residuals", residuals}};
}

SolveResult solve_from(const json& j) {
  SolveResult r;
  const auto q = j.at("q").get<std::vector<double>>();
  r.q = Eigen::Map<const Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size()));
  r.end_effector = pose_from(j.at("end_effector"));
  r.converged = j.at("converged").get<bool>();
  r.iterations = j.at("iterations").get<int>();
  r.attempts = j.at("attempts").get<int>();
  for (const auto& e : j.at("residuals"))
    r.residuals.push_back({e.at("tier").get<int>(), e.at("name").get<std::string>(), e.at("value").get<double>()});
  return r;
}

json parse_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, what + ": " + e.what());
  }
}

std::optional<std::size_t> index_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::size_t>();
}

json index_json(const std::optional<std::size_t>& i) { return i ? json(*i) : json(nullptr); }

}  // namespace

json pose_json(const Pose& p) {
  const Eigen::Vector4d q = p.rotation.wxyz();
  json j{{"translation", vec_json(p.translation)}, {"rotation", json::array({q[0], q[1], q[2], q[3]})}};
  if (p.timestamp) j["time"] = *p.timestamp;
  return j;
}

Pose pose_from(const json& j) {
  Pose p;
  p.translation = vec_from(j.at("translation"));
  const json& q = j.at("rotation");
  if (!q.is_array() || q.size() != 4) throw Error(ErrorKind::Parse, "rotation must be [w, x, y, z], got " + q.dump());
  const Eigen::Vector4d v(q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>(), q.at(3).get<double>());
  if (std::abs(v.norm() - 1.0) > 1e-6) throw Error(ErrorKind::Parse, "quaternion " + q.dump() + " is not unit-norm");
  p.rotation = Rotation::from_wxyz(v[0], v[1], v[2], v[3]);
  if (j.contains("time")) p.timestamp = j.at("time").get<double>();
  return p;
}

json nullspace_json(const NullspaceModel& n) {
  return {{"translation", translation_json(n.translation)},
          {"rotation", rotation_json(n.rotation)},
          {"rms", n.rms_fit_residual}};
}

NullspaceModel nullspace_from(const json& j) {
  NullspaceModel n;
  n.translation = translation_from(j.at("translation"));
  n.rotation = rotation_from(j.at("rotation"));
  n.rms_fit_residual = j.value("rms", 0.0);
  validate(n.translation);
  validate(n.rotation);
  return n;
}

}  // namespace detail

using detail::json;
using detail::parsing;

// ---- recordings -------------------------------------------------------------

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void parse_fail(const std::string& source, int line, const std::string& msg) {
  throw Error(ErrorKind::Parse, source + ":" + std::to_string(line) + ": " + msg);
}

double number(const std::string& tok, const std::string& source, int line) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size() || !std::isfinite(v))
    parse_fail(source, line, "invalid number '" + tok + "'");
  return v;
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

}  // namespace

Recording parse_recording(std::istream& in, const std::string& source) {
  Recording r;
  bool have_units = false, have_kind = false, have_frames = false;
  std::map<std::string, double> last_time;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] == '#') {
      r.comments.push_back(line.substr(1));
      continue;
    }
    const auto t = tokens(line);
    if (t.empty()) continue;
    if (t[0] == "units") {
      if (t.size() != 3 || t[1] != "length=m" || t[2] != "angle=rad")
        parse_fail(source, n, "units must be 'units length=m angle=rad'");
      have_units = true;
    } else if (t[0] == "kind") {
      if (t.size() != 2) parse_fail(source, n, "expected 'kind discrete|continuous'");
      try {
        r.kind = demonstration_kind_from_string(t[1]);
      } catch (const Error& e) {
        parse_fail(source, n, e.what());
      }
      have_kind = true;
    } else if (t[0] == "frames") {
      if (t.size() < 2) parse_fail(source, n, "expected at least one frame name");
      r.frames.assign(t.begin() + 1, t.end());
      have_frames = true;
    } else if (t[0] == "sample") {
      if (!have_units || !have_kind || !have_frames) parse_fail(source, n, "sample before the units/kind/frames header");
      if (t.size() != 10)
        parse_fail(source, n, "sample needs 't frame x y z qw qx qy qz' (9 fields), got " + std::to_string(t.size() - 1));
      RecordRow row;
      row.time = number(t[1], source, n);
      row.frame = t[2];
      if (std::find(r.frames.begin(), r.frames.end(), row.frame) == r.frames.end())
        parse_fail(source, n, "unknown frame '" + row.frame + "'");
      double v[7];
      for (int i = 0; i < 7; ++i) v[i] = number(t[3 + i], source, n);
      const double qn = std::sqrt(v[3] * v[3] + v[4] * v[4] + v[5] * v[5] + v[6] * v[6]);
      if (std::abs(qn - 1.0) > 1e-6) parse_fail(source, n, "quaternion is not unit-norm within 1e-6");
      if (const auto it = last_time.find(row.frame); it != last_time.end() && row.time < it->second)
        parse_fail(source, n, "timestamp decreases for frame '" + row.frame + "'");
      last_time[row.frame] = row.time;
      row.pose = Pose{Vec3(v[0], v[1], v[2]), Rotation::from_wxyz(v[3], v[4], v[5], v[6]), row.time};
      r.rows.push_back(std::move(row));
    } else {
      parse_fail(source, n, "unknown record '" + t[0] + "'");
    }
  }
  if (!have_units || !have_kind || !have_frames) parse_fail(source, n, "missing units/kind/frames header");
  return r;
}

void write_recording(std::ostream& out, const Recording& r) {
  out << "units length=m angle=rad\n";
  out << "kind " << to_string(r.kind) << "\n";
  out << "frames";
  for (const auto& f : r.frames) out << " " << f;
  out << "\n";
  for (const auto& c : r.comments) out << "#" << c << "\n";
  for (const auto& row : r.rows) {
    const Eigen::Vector4d q = row.pose.rotation.wxyz();
    out << "sample " << g17(row.time) << " " << row.frame;
    for (int i = 0; i < 3; ++i) out << " " << g17(row.pose.translation[i]);
    for (int i = 0; i < 4; ++i) out << " " << g17(q[i]);
    out << "\n";
  }
}

Recording load_recording(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open recording '" + path + "'");
  return parse_recording(in, path);
}

void save_recording(const std::string& path, const Recording& r) {
  std::ostringstream out;
  write_recording(out, r);
  write_file(path, out.str());
}

std::vector<Pose> frame_stream(const Recording& r, const std::string& frame) {
  if (std::find(r.frames.begin(), r.frames.end(), frame) == r.frames.end())
    throw Error(ErrorKind::InvalidArgument, "unknown frame '" + frame + "'");
  std::vector<Pose> out;
  for (const auto& row : r.rows)
    if (row.frame == frame) out.push_back(row.pose);
  return out;
}

Demonstration derive_demonstration(const Recording& r, const std::string& fixed, const std::string& constrained) {
  const std::vector<Pose> fs = frame_stream(r, fixed);
  const std::vector<Pose> cs = frame_stream(r, constrained);
  if (fs.empty()) throw Error(ErrorKind::InvalidArgument, "frame '" + fixed + "' has no samples");
  std::map<double, Pose> by_time;
  for (const auto& p : fs) by_time.emplace(*p.timestamp, p);

  Demonstration d;
  d.kind = r.kind;
  d.fixed_label = fixed;
  d.constrained_label = constrained;
  for (const auto& c : cs) {
    const Pose* f = &fs.front();
    if (fs.size() > 1) {
      const auto it = by_time.find(*c.timestamp);
      if (it == by_time.end())
        throw Error(ErrorKind::InvalidArgument, "no '" + fixed + "' pose at t=" + g17(*c.timestamp));
      f = &it->second;
    }
    d.samples.push_back(relative_pose(*f, c));
  }
  return d;
}

std::optional<NullspaceModel> recording_truth(const Recording& r) {
  for (const auto& c : r.comments) {
    const auto pos = c.find("truth ");
    if (pos == std::string::npos || c.find_first_not_of(' ') != pos) continue;
    const std::string text = c.substr(pos + 6);
    return parsing("truth comment", [&] { return detail::nullspace_from(detail::parse_text(text, "truth comment")); });
  }
  return std::nullopt;
}

// ---- JSON files -------------------------------------------------------------

std::string to_json(const Scene& s) { return detail::scene_json(s).dump(2); }

Scene scene_from_json(const std::string& text) {
  return parsing("scene", [&] { return detail::scene_from(detail::parse_text(text, "scene")); });
}

std::string to_json(const KinematicChain& c) {
  json joints = json::array();
  for (const auto& j : c.joints)
    joints.push_back({{"a", j.a},
                      {"alpha", j.alpha},
                      {"d", j.d},
                      {"theta_offset", j.theta_offset},
                      {"limits", detail::interval_json(j.limits)}});
  return json{{"name", c.name}, {"base", detail::pose_json(c.base)}, {"tool", detail::pose_json(c.tool)}, {"joints", joints}}
      .dump(2);
}

KinematicChain chain_from_json(const std::string& text) {
  return parsing("chain", [&] {
    const json j = detail::parse_text(text, "chain");
    KinematicChain c;
    c.name = j.value("name", std::string());
    c.base = j.contains("base") ? detail::pose_from(j.at("base")) : Pose::identity();
    c.tool = j.contains("tool") ? detail::pose_from(j.at("tool")) : Pose::identity();
    for (const auto& jj : j.at("joints")) {
      Joint joint;
      joint.a = jj.at("a").get<double>();
      joint.alpha = jj.at("alpha").get<double>();
      joint.d = jj.at("d").get<double>();
      joint.theta_offset = jj.value("theta_offset", 0.0);
      const json& lim = jj.at("limits");
      joint.limits = {lim.at(0).get<double>(), lim.at(1).get<double>()};
      c.joints.push_back(joint);
    }
    try {
      validate(c);
    } catch (const Error& e) {
      throw Error(ErrorKind::Parse, std::string("chain: ") + e.what());
    }
    return c;
  });
}

std::string to_json(const SkillFile& f) {
  const SkillModel& s = f.skill;
  json constraints = json::array();
  for (const auto& c : s.constraints) constraints.push_back(detail::constraint_json(c));
  json j{{"name", s.name},
         {"kind", to_string(s.kind)},
         {"fixed_object", s.fixed_object},
         {"constrained_object", s.constrained_object},
         {"constraints", constraints},
         {"nullspace", detail::nullspace_json(s.nullspace)},
         {"parameters", s.parameters},
         {"scene", detail::scene_json(s.scene)}};
  if (s.trajectory) j["trajectory"] = {{"parameter", s.trajectory->parameter}, {"values", s.trajectory->values}};
  if (f.fit) {
    json candidates = json::array();
    for (const auto& c : f.fit->candidates) candidates.push_back(detail::candidate_json(c));
    j["fit"] = {{"candidates", candidates},
                {"chosen", detail::index_json(f.fit->chosen)},
                {"rms", f.fit->rms},
                {"converged", f.fit->converged},
                {"residuals", f.fit->residuals},
                {"cost_history", f.fit->cost_history}};
  }
  return j.dump(2);
}

SkillFile skill_from_json(const std::string& text) {
  return parsing("skill", [&] {
    const json j = detail::parse_text(text, "skill");
    SkillFile f;
    SkillModel& s = f.skill;
    s.name = j.at("name").get<std::string>();
    s.kind = demonstration_kind_from_string(j.at("kind").get<std::string>());
    s.fixed_object = j.at("fixed_object").get<std::string>();
    s.constrained_object = j.at("constrained_object").get<std::string>();
    for (const auto& c : j.at("constraints")) s.constraints.push_back(detail::constraint_from(c));
    s.nullspace = detail::nullspace_from(j.at("nullspace"));
    s.parameters = j.value("parameters", std::map<std::string, double>{});
    if (j.contains("scene")) s.scene = detail::scene_from(j.at("scene"));
    if (j.contains("trajectory")) {
      s.trajectory = TrajectorySpec{j.at("trajectory").at("parameter").get<std::string>(),
                                    j.at("trajectory").at("values").get<std::vector<double>>()};
    }
    if (j.contains("fit")) {
      const json& jf = j.at("fit");
      FitSummary fs;
      for (const auto& c : jf.at("candidates")) fs.candidates.push_back(detail::candidate_from(c));
      fs.chosen = detail::index_from(jf.at("chosen"));
      fs.rms = jf.at("rms").get<double>();
      fs.converged = jf.at("converged").get<bool>();
      fs.residuals = jf.at("residuals").get<std::vector<double>>();
      fs.cost_history = jf.at("cost_history").get<std::vector<double>>();
      f.fit = fs;
    }
    return f;
  });
}

std::string to_json(const ObstacleFile& o) {
  json obs = json::array();
  for (const auto& x : o.obstacles)
    obs.push_back({{"center", detail::vec_json(x.center)}, {"radius", x.radius}, {"margin", x.margin}});
  return json{{"obstacles", obs}}.dump(2);
}

ObstacleFile obstacles_from_json(const std::string& text) {
  return parsing("obstacles", [&] {
    const json j = detail::parse_text(text, "obstacles");
    ObstacleFile f;
    for (const auto& x : j.at("obstacles")) {
      Obstacle o{detail::vec_from(x.at("center")), x.at("radius").get<double>(), x.value("margin", 0.0)};
      try {
        validate(o);
      } catch (const Error& e) {
        throw Error(ErrorKind::Parse, std::string("obstacles: ") + e.what());
      }
      f.obstacles.push_back(o);
    }
    return f;
  });
}

std::string to_json(const ResultFile& r) {
  json results = json::array();
  for (const auto& x : r.results) results.push_back(detail::solve_json(x));
  return json{{"skill", r.skill},
              {"trajectory", r.trajectory},
              {"failed_index", detail::index_json(r.failed_index)},
              {"parameters", r.parameters},
              {"results", results}}
      .dump(2);
}

ResultFile result_from_json(const std::string& text) {
  return parsing("result", [&] {
    const json j = detail::parse_text(text, "result");
    ResultFile r;
    r.skill = j.at("skill").get<std::string>();
    r.trajectory = j.at("trajectory").get<bool>();
    r.failed_index = detail::index_from(j.at("failed_index"));
    r.parameters = j.at("parameters").get<std::vector<double>>();
    for (const auto& x : j.at("results")) r.results.push_back(detail::solve_from(x));
    return r;
  });
}

std::string to_json(const GeneratorSpec& g) {
  json j{{"skill", g.skill},
         {"parameters", g.parameters},
         {"kind", to_string(g.kind)},
         {"fixed_frame", g.fixed_frame},
         {"constrained_frame", g.constrained_frame},
         {"count", g.count},
         {"sigma_t", g.sigma_t},
         {"sigma_r", g.sigma_r},
         {"seed", g.seed}};
  if (g.model) j["model"] = detail::nullspace_json(*g.model);
  if (g.bounds) {
    json dims = json::array();
    for (const auto& d : g.bounds->dims) dims.push_back(detail::interval_json(d));
    j["bounds"] = dims;
  }
  if (g.angle_range) j["angle_range"] = detail::interval_json(*g.angle_range);
  return j.dump(2);
}

GeneratorSpec generator_spec_from_json(const std::string& text) {
  return parsing("generator spec", [&] {
    const json j = detail::parse_text(text, "generator spec");
    GeneratorSpec g;
    g.skill = j.value("skill", std::string());
    g.parameters = j.value("parameters", std::map<std::string, double>{});
    g.kind = demonstration_kind_from_string(j.value("kind", std::string("discrete")));
    g.fixed_frame = j.value("fixed_frame", g.fixed_frame);
    g.constrained_frame = j.value("constrained_frame", g.constrained_frame);
    g.count = j.value("count", g.count);
    g.sigma_t = j.value("sigma_t", 0.0);
    g.sigma_r = j.value("sigma_r", 0.0);
    g.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("model")) g.model = detail::nullspace_from(j.at("model"));
    if (j.contains("bounds")) {
      ExtentBounds b;
      for (const auto& d : j.at("bounds")) b.dims.push_back(detail::interval_from(d));
      g.bounds = b;
    }
    if (j.contains("angle_range")) g.angle_range = detail::interval_from(j.at("angle_range"));
    return g;
  });
}

std::string to_json(const NullspaceModel& n) { return detail::nullspace_json(n).dump(2); }

NullspaceModel nullspace_from_json(const std::string& text) {
  return parsing("nullspace", [&] { return detail::nullspace_from(detail::parse_text(text, "nullspace")); });
}

// ---- poses ------------------------------------------------------------------

std::string to_text(const PosesFile& p) {
  std::ostringstream out;
  out << "# pose x y z qw qx qy qz (meters, unit quaternion)\n";
  for (const auto& pose : p.poses) {
    const Eigen::Vector4d q = pose.rotation.wxyz();
    out << "pose";
    for (int i = 0; i < 3; ++i) out << " " << g17(pose.translation[i]);
    for (int i = 0; i < 4; ++i) out << " " << g17(q[i]);
    out << "\n";
  }
  return out.str();
}

PosesFile poses_from_text(const std::string& text) {
  PosesFile p;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    const auto t = tokens(line);
    if (t.empty()) continue;
    if (t[0] != "pose" || t.size() != 8) parse_fail("poses", n, "expected 'pose x y z qw qx qy qz'");
    double v[7];
    for (int i = 0; i < 7; ++i) v[i] = number(t[1 + i], "poses", n);
    const double qn = std::sqrt(v[3] * v[3] + v[4] * v[4] + v[5] * v[5] + v[6] * v[6]);
    if (std::abs(qn - 1.0) > 1e-6) parse_fail("poses", n, "quaternion is not unit-norm within 1e-6");
    p.poses.push_back(Pose{Vec3(v[0], v[1], v[2]), Rotation::from_wxyz(v[3], v[4], v[5], v[6]), std::nullopt});
  }
  return p;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Parse, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorKind::InvalidArgument, "failed writing '" + path + "'");
}

}  // namespace skillspace
