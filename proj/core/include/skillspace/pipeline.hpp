#pragma once

#include <string>
#include <vector>

#include "skillspace/constraints.hpp"
#include "skillspace/fitting.hpp"
#include "skillspace/io.hpp"

namespace skillspace {

struct FitOptions {
  FitConfig config;
  BoundsConfig bounds;
  int waypoints = 10;       // trajectory waypoints for continuous demonstrations
  std::string name;         // skill name; defaults to the recording's skill comment or "skill"
};

/// Model selection, bounds and (for continuous data) trajectory extraction.
/// The result has no constraints yet; its nullspace is in the fixed frame.
SkillFile fit_skill(const Demonstration& d, const FitOptions& options = {});

struct InferResult {
  SkillModel skill;
  std::vector<ConstraintHypothesis> hypotheses;  // best first
};

/// Maps a fitted skill onto scene constraints. The nullspace is re-derived
/// from the best hypothesis; bounds the constraints do not imply and the
/// trajectory are carried over into the new coordinates. Without a match the
/// skill is returned unchanged.
InferResult infer_skill(const SkillModel& fitted, const Scene& scene, MatchOptions options = {});

}  // namespace skillspace

namespace skillspace {

/// Edits a named template parameter, or a constraint value addressed as
/// "constraint<i>.value", "constraint<i>.lo" or "constraint<i>.hi" (1-based).
/// Constraint edits re-derive the nullspace and keep bounds the constraints
/// do not imply.
SkillModel edit_skill(const SkillModel& s, const std::string& param, double value);

}  // namespace skillspace
