#include <benchmark/benchmark.h>

#include "syncnav/lie.hpp"
#include "syncnav/observer.hpp"
#include "syncnav/simulation.hpp"

using namespace syncnav;

static void BM_ExpSim23(benchmark::State& state) {
  SIM23Tangent xi{Vec3(0.3, -0.2, 0.1), Mat32::Constant(0.5), Mat2::Identity() * 0.1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(exp_sim23(xi));
  }
}
BENCHMARK(BM_ExpSim23);

static void BM_Conjugate(benchmark::State& state) {
  const SIM23 z = exp_sim23({Vec3(0.3, -0.2, 0.1), Mat32::Constant(0.5), Mat2::Identity() * 0.1});
  const SE23 x = exp_se23({Vec3(-0.1, 0.4, 0.2), Mat32::Constant(2.0)});
  for (auto _ : state) {
    benchmark::DoNotOptimize(conjugate(z, x));
  }
}
BENCHMARK(BM_Conjugate);

static void BM_ObserverUpdate(benchmark::State& state) {
  const WorldConstants w;
  const Gains g = preset_gains("pvm");
  const CircleSample c = circle_reference(0.3, w);
  const SE23 truth = nav_to_group(c.state);
  MeasurementBundle m;
  m.pos = measure_position(truth);
  m.vel = measure_velocity(truth);
  m.mag = measure_magnetometer(truth, w);
  ObserverState s = ObserverState::extreme();
  for (auto _ : state) {
    benchmark::DoNotOptimize(observer_update(s, c.input, m, g, w, 0.02));
  }
}
BENCHMARK(BM_ObserverUpdate);

static void BM_SimulateCircle(benchmark::State& state) {
  SimulationConfig cfg;
  cfg.duration = static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_circle(cfg));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cfg.duration / cfg.dt));
}
BENCHMARK(BM_SimulateCircle)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
