#include <benchmark/benchmark.h>

#include <cmath>

#include "rigidmotion/control.hpp"
#include "rigidmotion/motion_design.hpp"
#include "rigidmotion/simulation.hpp"

namespace rm = rigidmotion;

namespace {

// Triangulated strip: agents alternate between two rows, each new agent
// attaches to the previous two (Henneberg type-I, so minimally rigid).
rm::Framework strip(int agents) {
  std::vector<rm::Edge> edges{{0, 1}};
  for (int i = 2; i < agents; ++i) {
    edges.push_back({i, i - 1});
    edges.push_back({i, i - 2});
  }
  Eigen::VectorXd p(2 * agents);
  for (int i = 0; i < agents; ++i) {
    p(2 * i) = 10.0 * (i / 2) + 5.0 * (i % 2);
    p(2 * i + 1) = 8.0 * (i % 2) + 0.3 * std::sin(i);
  }
  return rm::Framework(rm::SensingGraph(agents, std::move(edges)), 2, p);
}

void BM_ControlLaw(benchmark::State& state) {
  const rm::Framework fw = strip(static_cast<int>(state.range(0)));
  const Eigen::VectorXd d = rm::edge_lengths(fw) * 1.05;
  const rm::ParameterVector pv = rm::ParameterVector::zero(fw.edge_count());
  for (auto _ : state) {
    benchmark::DoNotOptimize(rm::control_law(fw, d, pv, 5.0));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ControlLaw)->RangeMultiplier(2)->Range(4, 256)->Complexity();

void BM_MotionSpaces(benchmark::State& state) {
  const rm::ReferenceShape ref(strip(static_cast<int>(state.range(0))));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rm::motion_spaces(ref));
  }
}
BENCHMARK(BM_MotionSpaces)->RangeMultiplier(2)->Range(4, 32);

void BM_IntegrateSquare(benchmark::State& state) {
  const rm::Framework fw = strip(4);
  const rm::ReferenceShape ref(fw);
  rm::ControllerConfig cfg;
  cfg.gain = 5.0;
  cfg.params = rm::MotionParameters::zero(fw.edge_count());
  cfg.schedule = rm::ScalingSchedule::periodic(0.25, 1.5);
  rm::SimConfig sim;
  sim.dt = 1e-3;
  sim.duration = 1.0;
  sim.record_stride = 100;
  sim.perturbation = rm::Perturbation{1, 0.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(rm::integrate(fw, ref, cfg, sim));
  }
}
BENCHMARK(BM_IntegrateSquare)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
