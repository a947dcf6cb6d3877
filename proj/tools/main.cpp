// skillspace command-line tool.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skillspace/io.hpp"
#include "skillspace/pipeline.hpp"
#include "skillspace/random.hpp"
#include "skillspace/solver.hpp"

using namespace skillspace;
using nlohmann::json;

namespace {

constexpr int kUsage = 2;
constexpr int kParse = 3;
constexpr int kInfeasible = 4;

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::UnboundedDomain: return "unbounded-domain";
    case ErrorKind::Infeasible: return "infeasible";
  }
  return "error";
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse: return kParse;
    case ErrorKind::Infeasible: return kInfeasible;
    default: return kUsage;
  }
}

void report(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::map<std::string, double> parse_assignments(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& s : items) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorKind::InvalidArgument, "expected param=value, got '" + s + "'");
    const std::string v = s.substr(eq + 1);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size()) throw Error(ErrorKind::InvalidArgument, "invalid number in '" + s + "'");
    out[s.substr(0, eq)] = x;
  }
  return out;
}

// ---- commands ---------------------------------------------------------------

struct DemoGenArgs {
  std::string spec, out, scene;
  std::uint64_t seed = 0;
};

int demo_gen(const DemoGenArgs& a) {
  GeneratorSpec spec = generator_spec_from_json(read_file(a.spec));
  spec.seed = a.seed;
  const Scene scene = a.scene.empty() ? default_scene() : scene_from_json(read_file(a.scene));
  save_recording(a.out, generate_demonstration(spec, scene));
  return 0;
}

struct FitArgs {
  std::string recording, fixed, constrained, out, selector = "+z", name;
  double tau = 5e-3, lambda = 1.0;
  int waypoints = 10;
};

std::string recording_skill_name(const Recording& r) {
  for (const auto& c : r.comments)
    if (c.rfind(" skill ", 0) == 0) return c.substr(7);
  return {};
}

int fit(const FitArgs& a) {
  const Recording rec = load_recording(a.recording);
  const Demonstration d = derive_demonstration(rec, a.fixed, a.constrained);
  FitOptions o;
  o.config.tau = a.tau;
  o.config.lambda = a.lambda;
  o.config.selector = axis_selector_from_string(a.selector);
  validate(o.config);
  o.waypoints = a.waypoints;
  o.name = a.name.empty() ? recording_skill_name(rec) : a.name;
  const SkillFile f = fit_skill(d, o);

  std::printf("%-28s %-14s %s\n", "model", "rms", "chosen");
  for (std::size_t i = 0; i < f.fit->candidates.size(); ++i) {
    const auto& c = f.fit->candidates[i];
    std::printf("%-28s %-14.6g %s%s\n", to_string(c.candidate).c_str(), c.rms,
                f.fit->chosen == i ? "*" : (c.passed ? "pass" : "-"), c.note.empty() ? "" : ("  " + c.note).c_str());
  }
  if (!f.fit->chosen) std::printf("fallback: full3space+fullso3 (no candidate passed)\n");
  write_file(a.out, to_json(f));
  return 0;
}

struct InferArgs {
  std::string skillfile, scene, out;
  double position_tolerance = 0.01, angle_tolerance_deg = 5.0;
  std::size_t show = 5;
};

int infer(const InferArgs& a) {
  const SkillFile in = skill_from_json(read_file(a.skillfile));
  const Scene scene = scene_from_json(read_file(a.scene));
  MatchOptions m;
  m.position_tolerance = a.position_tolerance;
  m.angle_tolerance = a.angle_tolerance_deg * std::numbers::pi / 180.0;
  const InferResult r = infer_skill(in.skill, scene, m);
  if (r.hypotheses.empty()) {
    std::printf("no constraint set matches the fitted nullspace\n");
  }
  for (std::size_t i = 0; i < std::min(a.show, r.hypotheses.size()); ++i) {
    std::printf("#%zu distance %.6g\n", i + 1, r.hypotheses[i].distance);
    for (const auto& c : r.hypotheses[i].constraints) std::printf("    %s\n", to_string(c).c_str());
  }
  if (r.hypotheses.size() > a.show) std::printf("(%zu more)\n", r.hypotheses.size() - a.show);
  write_file(a.out, to_json(SkillFile{r.skill, in.fit}));
  return 0;
}

struct EditArgs {
  std::string skillfile, out;
  std::vector<std::string> set;
};

int edit(const EditArgs& a) {
  SkillFile f = skill_from_json(read_file(a.skillfile));
  for (const auto& [k, v] : parse_assignments(a.set)) f.skill = edit_skill(f.skill, k, v);
  f.fit.reset();
  write_file(a.out, to_json(f));
  return 0;
}

struct TemplateArgs {
  std::string skill, scene, out;
  std::vector<std::string> set;
};

int make_template(const TemplateArgs& a) {
  const Scene scene = a.scene.empty() ? default_scene() : scene_from_json(read_file(a.scene));
  write_file(a.out, to_json(SkillFile{skill_template(a.skill, scene, parse_assignments(a.set)), std::nullopt}));
  return 0;
}

struct DefaultsArgs {
  std::string scene, chain;
};

int defaults(const DefaultsArgs& a) {
  if (a.scene.empty() && a.chain.empty()) throw Error(ErrorKind::InvalidArgument, "nothing to write");
  if (!a.scene.empty()) write_file(a.scene, to_json(default_scene()));
  if (!a.chain.empty()) write_file(a.chain, to_json(default_chain()));
  return 0;
}

struct SampleArgs {
  std::string skillfile, out;
  int count = 10;
  std::uint64_t seed = 0;
};

int sample(const SampleArgs& a) {
  if (a.count <= 0) throw Error(ErrorKind::InvalidArgument, "count must be positive");
  const SkillModel s = skill_from_json(read_file(a.skillfile)).skill;
  const bool world = s.scene.has_object(s.fixed_object);
  const Pose fixed = world ? s.scene.object(s.fixed_object).pose : Pose::identity();
  PosesFile p;
  Rng seeds(a.seed);
  for (int i = 0; i < a.count; ++i) p.poses.push_back(compose(fixed, sample_pose(s.nullspace, {}, seeds.next())));
  write_file(a.out, std::string("# frame ") + (world ? "world" : s.fixed_object) + "\n" + to_text(p));
  return 0;
}

struct SolveArgs {
  std::string skillfile, chain, scene, obstacles, out;
  std::uint64_t seed = 0;
  int retries = 32;
};

int solve_cmd(const SolveArgs& a) {
  const SkillModel s = skill_from_json(read_file(a.skillfile)).skill;
  const KinematicChain chain = chain_from_json(read_file(a.chain));
  const Scene scene = scene_from_json(read_file(a.scene));
  const std::vector<Obstacle> obstacles =
      a.obstacles.empty() ? std::vector<Obstacle>{} : obstacles_from_json(read_file(a.obstacles)).obstacles;
  SolveOptions opt;
  opt.retry_budget = a.retries;

  ResultFile r;
  r.skill = s.name;
  bool ok = true;
  if (s.kind == DemonstrationKind::Continuous && s.trajectory) {
    TrajectoryResult t = solve_trajectory(s, chain, scene, obstacles, PrioritySpec{}, a.seed, opt);
    r.trajectory = true;
    r.results = std::move(t.waypoints);
    r.parameters = std::move(t.parameters);
    r.failed_index = t.failed_index;
    ok = !r.failed_index;
  } else {
    r.results.push_back(solve(s, chain, scene, obstacles, PrioritySpec{}, a.seed, opt));
    ok = r.results.back().converged;
  }
  write_file(a.out, to_json(r));
  for (std::size_t i = 0; i < r.results.size(); ++i) {
    const auto& x = r.results[i];
    std::printf("%zu converged=%d tier1=%.3g tier2=%.3g tier3=%.3g attempts=%d\n", i, x.converged ? 1 : 0,
                x.tier_total(1), x.tier_total(2), x.tier_total(3), x.attempts);
  }
  if (!ok) {
    report("infeasible", r.failed_index ? "waypoint " + std::to_string(*r.failed_index) + " did not converge"
                                        : "no converged solution within the retry budget");
    return kInfeasible;
  }
  return 0;
}

struct PlotArgs {
  std::string in, out;
};

std::string plot_recording(const std::string& text, const std::string& source) {
  std::istringstream is(text);
  const Recording r = parse_recording(is, source);
  std::ostringstream o;
  o << "t,frame,x,y,z,qw,qx,qy,qz\n";
  for (const auto& row : r.rows) {
    const auto q = row.pose.rotation.wxyz();
    o << g17(row.time) << "," << row.frame;
    for (int i = 0; i < 3; ++i) o << "," << g17(row.pose.translation[i]);
    for (int i = 0; i < 4; ++i) o << "," << g17(q[i]);
    o << "\n";
  }
  return o.str();
}

std::string plot_poses(const std::string& text) {
  const PosesFile p = poses_from_text(text);
  std::ostringstream o;
  o << "index,x,y,z,qw,qx,qy,qz\n";
  for (std::size_t k = 0; k < p.poses.size(); ++k) {
    const auto q = p.poses[k].rotation.wxyz();
    o << k;
    for (int i = 0; i < 3; ++i) o << "," << g17(p.poses[k].translation[i]);
    for (int i = 0; i < 4; ++i) o << "," << g17(q[i]);
    o << "\n";
  }
  return o.str();
}

std::string plot_skill(const SkillFile& f) {
  std::ostringstream o;
  o << "series,index,value\n";
  const auto series = [&](const char* name, const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) o << name << "," << i << "," << g17(v[i]) << "\n";
  };
  if (f.fit) {
    series("residual", f.fit->residuals);
    series("cost", f.fit->cost_history);
  }
  if (f.skill.trajectory) series("waypoint", f.skill.trajectory->values);
  return o.str();
}

std::string plot_result(const ResultFile& r) {
  std::ostringstream o;
  const std::size_t dof = r.results.empty() ? 0 : static_cast<std::size_t>(r.results.front().q.size());
  o << "index,parameter,converged,tier1,tier2,tier3";
  for (std::size_t j = 0; j < dof; ++j) o << ",q" << j;
  o << "\n";
  for (std::size_t k = 0; k < r.results.size(); ++k) {
    const auto& x = r.results[k];
    o << k << "," << (k < r.parameters.size() ? g17(r.parameters[k]) : std::string()) << "," << (x.converged ? 1 : 0)
      << "," << g17(x.tier_total(1)) << "," << g17(x.tier_total(2)) << "," << g17(x.tier_total(3));
    for (Eigen::Index j = 0; j < x.q.size(); ++j) o << "," << g17(x.q[j]);
    o << "\n";
  }
  return o.str();
}

int plot_data(const PlotArgs& a) {
  const std::string text = read_file(a.in);
  const auto first = text.find_first_not_of(" \t\r\n");
  std::string csv;
  if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::Parse, a.in + ": " + e.what());
    }
    if (j.contains("nullspace")) {
      csv = plot_skill(skill_from_json(text));
    } else if (j.contains("results")) {
      csv = plot_result(result_from_json(text));
    } else {
      throw Error(ErrorKind::Parse, a.in + ": not a skill or result file");
    }
  } else if (text.find("\nsample ") != std::string::npos || text.rfind("units", first) == first) {
    csv = plot_recording(text, a.in);
  } else {
    csv = plot_poses(text);
  }
  write_file(a.out, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn, edit and execute geometric-constraint skills"};
  app.require_subcommand(1);
  std::function<int()> run;

  DemoGenArgs dg;
  auto* c = app.add_subcommand("demo-gen", "Generate a synthetic demonstration recording");
  c->add_option("--spec", dg.spec, "Generator spec (JSON)")->required()->check(CLI::ExistingFile);
  c->add_option("--out", dg.out, "Recording to write")->required();
  c->add_option("--seed", dg.seed, "Random seed")->required();
  c->add_option("--scene", dg.scene, "Scene (JSON); default desk scene otherwise")->check(CLI::ExistingFile);
  c->callback([&] { run = [&] { return demo_gen(dg); }; });

  FitArgs fa;
  c = app.add_subcommand("fit", "Select and fit a nullspace model to a recording");
  c->add_option("--recording", fa.recording)->required()->check(CLI::ExistingFile);
  c->add_option("--fixed", fa.fixed, "Fixed frame name")->required();
  c->add_option("--constrained", fa.constrained, "Constrained frame name")->required();
  c->add_option("--tau", fa.tau, "RMS acceptance threshold")->capture_default_str();
  c->add_option("--lambda", fa.lambda, "Rotation residual weight")->capture_default_str();
  c->add_option("--selector", fa.selector, "Constrained body axis (+x,-x,+y,-y,+z,-z)")->capture_default_str();
  c->add_option("--waypoints", fa.waypoints, "Trajectory waypoints for continuous recordings")->capture_default_str();
  c->add_option("--name", fa.name, "Skill name");
  c->add_option("--out", fa.out, "Skill file to write")->required();
  c->callback([&] { run = [&] { return fit(fa); }; });

  InferArgs ia;
  c = app.add_subcommand("infer", "Map a fitted skill onto scene constraints");
  c->add_option("--skillfile", ia.skillfile)->required()->check(CLI::ExistingFile);
  c->add_option("--scene", ia.scene)->required()->check(CLI::ExistingFile);
  c->add_option("--position-tolerance", ia.position_tolerance, "meters")->capture_default_str();
  c->add_option("--angle-tolerance", ia.angle_tolerance_deg, "degrees")->capture_default_str();
  c->add_option("--show", ia.show, "Hypotheses to print")->capture_default_str();
  c->add_option("--out", ia.out)->required();
  c->callback([&] { run = [&] { return infer(ia); }; });

  EditArgs ea;
  c = app.add_subcommand("edit", "Change skill parameters");
  c->add_option("--skillfile", ea.skillfile)->required()->check(CLI::ExistingFile);
  c->add_option("--set", ea.set, "param=value (repeatable)")->required();
  c->add_option("--out", ea.out)->required();
  c->callback([&] { run = [&] { return edit(ea); }; });

  TemplateArgs ta;
  c = app.add_subcommand("template", "Write a skill template");
  c->add_option("--skill", ta.skill)->required()->check(CLI::IsMember(skill_names()));
  c->add_option("--scene", ta.scene)->check(CLI::ExistingFile);
  c->add_option("--set", ta.set, "param=value (repeatable)");
  c->add_option("--out", ta.out)->required();
  c->callback([&] { run = [&] { return make_template(ta); }; });

  DefaultsArgs da;
  c = app.add_subcommand("defaults", "Write the default scene and/or chain");
  c->add_option("--scene", da.scene, "Scene file to write");
  c->add_option("--chain", da.chain, "Chain file to write");
  c->callback([&] { run = [&] { return defaults(da); }; });

  SampleArgs sa;
  c = app.add_subcommand("sample", "Sample poses from a skill nullspace");
  c->add_option("--skillfile", sa.skillfile)->required()->check(CLI::ExistingFile);
  c->add_option("--count", sa.count)->required();
  c->add_option("--seed", sa.seed)->required();
  c->add_option("--out", sa.out)->required();
  c->callback([&] { run = [&] { return sample(sa); }; });

  SolveArgs so;
  c = app.add_subcommand("solve", "Solve joint configurations for a skill");
  c->add_option("--skillfile", so.skillfile)->required()->check(CLI::ExistingFile);
  c->add_option("--chain", so.chain)->required()->check(CLI::ExistingFile);
  c->add_option("--scene", so.scene)->required()->check(CLI::ExistingFile);
  c->add_option("--obstacles", so.obstacles)->check(CLI::ExistingFile);
  c->add_option("--seed", so.seed)->required();
  c->add_option("--retries", so.retries, "Nullspace samples per solve")->capture_default_str();
  c->add_option("--out", so.out)->required();
  c->callback([&] { run = [&] { return solve_cmd(so); }; });

  PlotArgs pa;
  c = app.add_subcommand("plot-data", "Flatten an artifact into CSV");
  c->add_option("--in", pa.in)->required()->check(CLI::ExistingFile);
  c->add_option("--out", pa.out)->required();
  c->callback([&] { run = [&] { return plot_data(pa); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report("usage", e.what());
    return kUsage;
  }

  try {
    return run();
  } catch (const Error& e) {
    report(kind_name(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    report("internal", e.what());
    return 1;
  }
}
