#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skillspace/constraints.hpp"
#include "skillspace/fitting.hpp"
#include "skillspace/kinematics.hpp"
#include "skillspace/solver.hpp"

namespace skillspace {

// ---- recordings -----------------------------------------------------------
//
// Line-oriented text:
//   units length=m angle=rad
//   kind discrete|continuous
//   frames <name> <name> ...
//   sample <t> <frame> <x> <y> <z> <qw> <qx> <qy> <qz>
// Lines starting with '#' are comments; "# truth {...}" carries the
// generating model as JSON.

struct RecordRow {
  double time = 0.0;
  std::string frame;
  Pose pose;
};

struct Recording {
  DemonstrationKind kind = DemonstrationKind::Discrete;
  std::vector<std::string> frames;
  std::vector<RecordRow> rows;
  std::vector<std::string> comments;  // text after '#', in file order
};

/// Throws Parse errors naming the offending line.
Recording parse_recording(std::istream& in, const std::string& source = "recording");
void write_recording(std::ostream& out, const Recording& r);
Recording load_recording(const std::string& path);
void save_recording(const std::string& path, const Recording& r);

/// Poses of `frame` in recording order.
std::vector<Pose> frame_stream(const Recording& r, const std::string& frame);

/// Constrained frame relative to the fixed frame, paired by timestamp. A
/// fixed frame with a single record is treated as static.
Demonstration derive_demonstration(const Recording& r, const std::string& fixed, const std::string& constrained);

/// Generating model stored in the "truth" comment, if any.
std::optional<NullspaceModel> recording_truth(const Recording& r);

// ---- synthetic demonstrations ---------------------------------------------

struct GeneratorSpec {
  std::string skill;                         // template name; empty when `model` is set
  std::map<std::string, double> parameters;  // template parameter overrides
  std::optional<NullspaceModel> model;       // raw nullspace in the fixed frame
  DemonstrationKind kind = DemonstrationKind::Discrete;  // for raw models
  std::string fixed_frame = "fixed";                     // for raw models
  std::string constrained_frame = "constrained";         // for raw models
  int count = 100;
  double sigma_t = 0.0;  // meters
  double sigma_r = 0.0;  // radians
  std::uint64_t seed = 0;
  std::optional<ExtentBounds> bounds;      // overrides the translation sampling range
  std::optional<Interval> angle_range;     // overrides the angle sampling range
};

void validate(const GeneratorSpec& s);

/// Samples on the nullspace with Gaussian noise. Continuous skills sweep their
/// trajectory parameter monotonically. Deterministic per seed.
Recording generate_demonstration(const GeneratorSpec& spec, const Scene& scene = default_scene());

// ---- structured files (JSON) ----------------------------------------------

struct FitSummary {
  std::vector<CandidateReport> candidates;
  std::optional<std::size_t> chosen;
  double rms = 0.0;
  bool converged = false;
  std::vector<double> residuals;
  std::vector<double> cost_history;
};

struct SkillFile {
  SkillModel skill;
  std::optional<FitSummary> fit;
};

struct PosesFile {
  std::vector<Pose> poses;
};

struct ObstacleFile {
  std::vector<Obstacle> obstacles;
};

struct ResultFile {
  std::string skill;
  std::vector<SolveResult> results;          // one per waypoint for trajectories
  std::vector<double> parameters;            // measured trajectory parameters
  std::optional<std::size_t> failed_index;
  bool trajectory = false;
};

std::string to_json(const Scene& s);
std::string to_json(const KinematicChain& c);
std::string to_json(const SkillFile& s);
std::string to_json(const ObstacleFile& o);
std::string to_json(const ResultFile& r);
std::string to_json(const GeneratorSpec& g);
std::string to_json(const NullspaceModel& n);

Scene scene_from_json(const std::string& text);
KinematicChain chain_from_json(const std::string& text);
SkillFile skill_from_json(const std::string& text);
ObstacleFile obstacles_from_json(const std::string& text);
ResultFile result_from_json(const std::string& text);
GeneratorSpec generator_spec_from_json(const std::string& text);
NullspaceModel nullspace_from_json(const std::string& text);

/// Poses file: "pose x y z qw qx qy qz" per line, '#' comments.
std::string to_text(const PosesFile& p);
PosesFile poses_from_text(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace skillspace
