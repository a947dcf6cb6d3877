#include <cmath>
#include <string>

#include "json_convert.hpp"
#include "skillspace/io.hpp"
#include "skillspace/random.hpp"

namespace skillspace {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (i + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Source {
  NullspaceModel model;  // fixed frame
  DemonstrationKind kind = DemonstrationKind::Discrete;
  std::string fixed_frame, constrained_frame;
  Pose fixed_pose;
  std::optional<SkillModel> skill;
};

Source resolve(const GeneratorSpec& spec, const Scene& scene) {
  Source s;
  if (spec.model) {
    s.model = *spec.model;
    s.kind = spec.kind;
    s.fixed_frame = spec.fixed_frame;
    s.constrained_frame = spec.constrained_frame;
    return s;
  }
  SkillModel sk = skill_template(spec.skill, scene, spec.parameters);
  s.model = sk.nullspace;
  s.kind = sk.kind;
  s.fixed_frame = sk.fixed_object;
  s.constrained_frame = sk.constrained_object;
  s.fixed_pose = sk.scene.object(sk.fixed_object).pose;
  s.skill = std::move(sk);
  return s;
}

// Range swept by a continuous raw model: the first bounded coordinate of a
// line or circle, else the angle interval.
std::optional<std::pair<std::string, Interval>> raw_sweep(const NullspaceModel& n, const GeneratorSpec& spec) {
  const auto t = n.translation.type();
  const auto& b = spec.bounds ? spec.bounds : n.translation.bounds;
  if (t == TranslationType::Line && b && !b->dims.empty()) return std::pair{std::string("line"), b->dims[0]};
  if (t == TranslationType::Circle)
    return std::pair{std::string("circle"),
                     b && !b->dims.empty() ? b->dims[0] : Interval{-std::numbers::pi, std::numbers::pi}};
  if (const auto* a = std::get_if<OneAngle>(&n.rotation.form)) {
    if (spec.angle_range) return std::pair{std::string("angle"), *spec.angle_range};
    if (a->interval) return std::pair{std::string("angle"), *a->interval};
  }
  return std::nullopt;
}

}  // namespace

void validate(const GeneratorSpec& s) {
  if (s.skill.empty() == !s.model.has_value())
    throw Error(ErrorKind::InvalidArgument, "generator spec needs exactly one of 'skill' or 'model'");
  if (s.count <= 0) throw Error(ErrorKind::InvalidArgument, "generator count must be positive");
  if (!(s.sigma_t >= 0.0) || !(s.sigma_r >= 0.0) || !std::isfinite(s.sigma_t) || !std::isfinite(s.sigma_r))
    throw Error(ErrorKind::InvalidArgument, "noise sigmas must be finite and non-negative");
  if (s.fixed_frame.empty() || s.constrained_frame.empty() || s.fixed_frame == s.constrained_frame)
    throw Error(ErrorKind::InvalidArgument, "frame names must be distinct and non-empty");
  if (s.model) {
    validate(s.model->translation);
    validate(s.model->rotation);
  }
}

Recording generate_demonstration(const GeneratorSpec& spec, const Scene& scene) {
  validate(spec);
  const Source src = resolve(spec, scene);
  const bool continuous = src.kind == DemonstrationKind::Continuous;

  SampleSpec base;
  base.translation_range = spec.bounds;
  base.angle_range = spec.angle_range;

  std::optional<std::pair<std::string, Interval>> sweep;
  if (continuous) {
    if (src.skill) {
      const auto& values = src.skill->trajectory->values;
      sweep = std::pair{src.skill->trajectory->parameter, Interval{values.front(), values.back()}};
    } else {
      sweep = raw_sweep(src.model, spec);
    }
  }

  Recording r;
  r.kind = src.kind;
  r.frames = {src.fixed_frame, src.constrained_frame};
  r.comments.push_back(" truth " + detail::nullspace_json(src.model).dump());
  if (src.skill) r.comments.push_back(" skill " + src.skill->name);

  for (int i = 0; i < spec.count; ++i) {
    const double time = continuous ? 0.05 * i : static_cast<double>(i);
    NullspaceModel target = src.model;
    SampleSpec ss = base;
    if (sweep) {
      const double u = spec.count > 1 ? static_cast<double>(i) / (spec.count - 1) : 0.0;
      const double v = sweep->second.lo + u * (sweep->second.hi - sweep->second.lo);
      if (sweep->first == "angle") {
        ss.angle_range = Interval{v, v};
      } else {
        ss.translation_range = ExtentBounds{{{v, v}}};
      }
    }
    Pose rel = sample_pose(target, ss, mix(spec.seed, static_cast<std::uint64_t>(i)));
    if (spec.sigma_t > 0.0 || spec.sigma_r > 0.0) {
      Rng noise(mix(~spec.seed, static_cast<std::uint64_t>(i)));
      rel.translation += spec.sigma_t * noise.normal3();
      rel.rotation = rotation_from_vector(spec.sigma_r * noise.normal3()) * rel.rotation;
    }
    Pose fixed = src.fixed_pose;
    fixed.timestamp = time;
    Pose world = compose(src.fixed_pose, rel);
    world.timestamp = time;
    r.rows.push_back({time, src.fixed_frame, fixed});
    r.rows.push_back({time, src.constrained_frame, world});
  }
  return r;
}

}  // namespace skillspace
