#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "skillspace/solver.hpp"
#include "support.hpp"

using namespace skillspace;
using namespace skillspace::testing;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const char* cli = std::getenv("SKILLSPACE_CLI");
    if (!cli) GTEST_SKIP() << "SKILLSPACE_CLI not set";
    exe_ = cli;
    dir_ = fs::temp_directory_path() /
           ("skillspace-cli-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ASSERT_EQ(run("defaults --scene " + path("scene.json") + " --chain " + path("chain.json")), 0);
  }
  void TearDown() override {
    if (!dir_.empty()) fs::remove_all(dir_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(const std::string& args) {
    const std::string cmd = exe_ + " " + args + " >" + path("stdout.txt") + " 2>" + path("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string slurp(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  void spec(const std::string& skill, int count, const std::string& name = "spec.json") {
    GeneratorSpec g;
    g.skill = skill;
    g.count = count;
    g.sigma_t = 1e-4;
    g.sigma_r = 1e-4;
    write_file(path(name), to_json(g));
  }

  // template -> solve input
  void skill_file(const std::string& skill) {
    ASSERT_EQ(run("template --skill " + skill + " --out " + path(skill + ".json")), 0);
  }

  std::string solve_args(const std::string& skill, const std::string& out) const {
    return "solve --skillfile " + path(skill + ".json") + " --chain " + path("chain.json") + " --scene " +
           path("scene.json") + " --seed 3 --out " + path(out);
  }

  std::string exe_;
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  spec("place", 10);
  EXPECT_EQ(run("demo-gen --spec " + path("spec.json") + " --out " + path("r.rec")), 2);  // no --seed
  EXPECT_NE(slurp("stderr.txt").find("\"usage\""), std::string::npos);
  EXPECT_FALSE(fs::exists(path("r.rec")));
  EXPECT_EQ(run("template --skill juggle --out " + path("t.json")), 2);
  EXPECT_EQ(run("fit --recording " + path("missing.rec") + " --fixed a --constrained b --out " + path("f.json")), 2);
}

TEST_F(Cli, SeedIsRequiredForRandomCommands) {
  skill_file("place");
  EXPECT_EQ(run("sample --skillfile " + path("place.json") + " --count 3 --out " + path("s.txt")), 2);
  EXPECT_EQ(run("solve --skillfile " + path("place.json") + " --chain " + path("chain.json") + " --scene " +
                path("scene.json") + " --out " + path("s.json")),
            2);
}

TEST_F(Cli, ParseErrorNamesTheLine) {
  std::ofstream(path("bad.rec")) << "units length=m angle=rad\nkind discrete\nframes a b\n"
                                 << "sample 0 a 0 0 0 1 0 0 0\nsample 0 b 0 0 0 1 0 0\n";
  EXPECT_EQ(run("fit --recording " + path("bad.rec") + " --fixed a --constrained b --out " + path("f.json")), 3);
  EXPECT_NE(slurp("stderr.txt").find("bad.rec:5:"), std::string::npos) << slurp("stderr.txt");
  std::ofstream(path("bad.json")) << "{ nope";
  EXPECT_EQ(run("infer --skillfile " + path("bad.json") + " --scene " + path("scene.json") + " --out " + path("i.json")), 3);
}

TEST_F(Cli, InvalidArgumentIsUsage) {
  skill_file("place");
  EXPECT_EQ(run("edit --skillfile " + path("place.json") + " --set colour=1 --out " + path("e.json")), 2);
  EXPECT_EQ(run("edit --skillfile " + path("place.json") + " --set distance --out " + path("e.json")), 2);
}

TEST_F(Cli, FullPipelineIsDeterministic) {
  spec("grasp", 60);
  std::string first[5];
  for (int pass = 0; pass < 2; ++pass) {
    ASSERT_EQ(run("demo-gen --spec " + path("spec.json") + " --seed 11 --out " + path("g.rec")), 0);
    ASSERT_EQ(run("fit --recording " + path("g.rec") + " --fixed cup --constrained gripper --name grasp --out " +
                  path("fit.json")),
              0);
    ASSERT_EQ(run("infer --skillfile " + path("fit.json") + " --scene " + path("scene.json") + " --out " +
                  path("grasp.json")),
              0);
    ASSERT_EQ(run("sample --skillfile " + path("grasp.json") + " --count 20 --seed 5 --out " + path("s.txt")), 0);
    ASSERT_EQ(run(solve_args("grasp", "solve.json")), 0) << slurp("stderr.txt");
    const std::string now[5] = {slurp("g.rec"), slurp("fit.json"), slurp("grasp.json"), slurp("s.txt"),
                                slurp("solve.json")};
    for (int i = 0; i < 5; ++i) {
      EXPECT_FALSE(now[i].empty());
      if (pass == 1) {
        EXPECT_EQ(now[i], first[i]) << "artifact " << i;
      }
      first[i] = now[i];
    }
  }
  const SkillModel s = skill_from_json(first[2]).skill;
  EXPECT_EQ(s.constraints.size(), 2u);
  const ResultFile r = result_from_json(first[4]);
  ASSERT_EQ(r.results.size(), 1u);
  EXPECT_TRUE(r.results[0].converged);
}

TEST_F(Cli, EmptyObstacleFileMatchesNoFlag) {
  skill_file("grasp");
  write_file(path("none.json"), to_json(ObstacleFile{}));
  ASSERT_EQ(run(solve_args("grasp", "a.json")), 0);
  ASSERT_EQ(run(solve_args("grasp", "b.json") + " --obstacles " + path("none.json")), 0);
  EXPECT_EQ(slurp("a.json"), slurp("b.json"));
}

TEST_F(Cli, TwoSamplesNeverCylinder) {
  std::ofstream(path("two.rec")) << "units length=m angle=rad\nkind discrete\nframes a b\n"
                                 << "sample 0 a 0 0 0 1 0 0 0\nsample 0 b 0.1 0 0 1 0 0 0\n"
                                 << "sample 1 b 0.2 0.05 0 1 0 0 0\n";
  ASSERT_EQ(run("fit --recording " + path("two.rec") + " --fixed a --constrained b --out " + path("f.json")), 0)
      << slurp("stderr.txt");
  const SkillFile f = skill_from_json(slurp("f.json"));
  EXPECT_NE(f.skill.nullspace.translation.type(), TranslationType::Cylinder);
}

TEST_F(Cli, InfeasibleExitsFour) {
  skill_file("grasp");
  const Pose cup = default_scene().object("cup").pose;
  write_file(path("wall.json"), to_json(ObstacleFile{{{cup.translation + Vec3(0, 0, 0.05), 0.12, 0.0}}}));
  EXPECT_EQ(run(solve_args("grasp", "r.json") + " --retries 4 --obstacles " + path("wall.json")), 4);
  EXPECT_NE(slurp("stderr.txt").find("\"infeasible\""), std::string::npos);
  const ResultFile r = result_from_json(slurp("r.json"));
  ASSERT_EQ(r.results.size(), 1u);
  EXPECT_FALSE(r.results[0].converged);
}

TEST_F(Cli, TrajectoryAndPlotData) {
  skill_file("pull");
  ASSERT_EQ(run(solve_args("pull", "p.json")), 0) << slurp("stderr.txt");
  const ResultFile r = result_from_json(slurp("p.json"));
  EXPECT_TRUE(r.trajectory);
  EXPECT_EQ(r.results.size(), 10u);
  ASSERT_EQ(run("plot-data --in " + path("p.json") + " --out " + path("p.csv")), 0);
  const std::string csv = slurp("p.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11);  // header and one row per waypoint
}

TEST_F(Cli, EditRoundTrip) {
  skill_file("grasp");
  ASSERT_EQ(run("edit --skillfile " + path("grasp.json") + " --set radius=0.06 --set height=0.15 --out " +
                path("e.json")),
            0);
  const SkillModel e = skill_from_json(slurp("e.json")).skill;
  EXPECT_EQ(e.parameters.at("radius"), 0.06);
  EXPECT_EQ(e.parameters.at("height"), 0.15);
  EXPECT_TRUE(consistent(e));
}
