#include <benchmark/benchmark.h>

#include "skillspace/pipeline.hpp"
#include "skillspace/random.hpp"
#include "skillspace/solver.hpp"

using namespace skillspace;

namespace {

Demonstration demo(const std::string& skill, int count) {
  GeneratorSpec g;
  g.skill = skill;
  g.count = count;
  g.seed = 1;
  g.sigma_t = 5e-4;
  g.sigma_r = 5e-4;
  const SkillModel t = skill_template(skill, default_scene());
  return derive_demonstration(generate_demonstration(g), t.fixed_object, t.constrained_object);
}

void BM_Distances(benchmark::State& state) {
  const SkillModel s = skill_template("grasp", default_scene());
  Rng rng(2);
  std::vector<Pose> poses;
  for (int i = 0; i < 1024; ++i) poses.push_back({Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)), rng.rotation(), std::nullopt});
  for (auto _ : state) {
    double sum = 0.0;
    for (const Pose& p : poses) sum += dist_t(s.nullspace, p) + dist_r(s.nullspace, p);
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(state.iterations() * poses.size());
}
BENCHMARK(BM_Distances);

void BM_SelectModel(benchmark::State& state) {
  const Demonstration d = demo("grasp", static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(select_model(d, FitConfig{}));
}
BENCHMARK(BM_SelectModel)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_FitAndInfer(benchmark::State& state) {
  const Demonstration d = demo("place", 200);
  const Scene scene = default_scene();
  for (auto _ : state) benchmark::DoNotOptimize(infer_skill(fit_skill(d).skill, scene));
}
BENCHMARK(BM_FitAndInfer)->Unit(benchmark::kMillisecond);

void BM_Solve(benchmark::State& state) {
  const SkillModel s = skill_template("grasp", default_scene());
  const KinematicChain chain = default_chain();
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(solve(s, chain, s.scene, {}, {}, seed++));
}
BENCHMARK(BM_Solve)->Unit(benchmark::kMillisecond);

void BM_SolveTrajectory(benchmark::State& state) {
  const SkillModel s = skill_template("pour", default_scene());
  const KinematicChain chain = default_chain();
  for (auto _ : state) benchmark::DoNotOptimize(solve_trajectory(s, chain, s.scene, {}, {}, 1));
}
BENCHMARK(BM_SolveTrajectory)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
