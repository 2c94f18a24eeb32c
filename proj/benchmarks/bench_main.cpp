#include <benchmark/benchmark.h>

#include "cablepaint/dynamics.hpp"

using namespace cablepaint;

static void BM_ForwardDynamics(benchmark::State& state) {
  RobotModel model;
  PlanarPose pose{0.02, Vec2(0.3, -0.2)};
  PlanarTwist twist{0.1, Vec2(0.8, -0.4)};
  Vec4 tau(0.4, 1.2, 1.1, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_dynamics(model, pose, twist, tau));
  }
}
BENCHMARK(BM_ForwardDynamics);

static void BM_PlanarStep(benchmark::State& state) {
  RobotModel model;
  Vec4 x(0.3, -0.2, 0.8, -0.4);
  Vec4 u(0.4, 1.2, 1.1, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(planar_step(model, x, u, 0.01));
  }
}
BENCHMARK(BM_PlanarStep);

static void BM_StaticTensions(benchmark::State& state) {
  RobotModel model;
  PlanarPose pose{0.0, Vec2(0.4, 0.3)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(static_tensions(model, pose));
  }
}
BENCHMARK(BM_StaticTensions);

BENCHMARK_MAIN();
