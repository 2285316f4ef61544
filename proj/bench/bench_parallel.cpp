// Serial reference against the OpenMP kernels.
#include <benchmark/benchmark.h>

#include <random>

#include "nsorch/config.hpp"
#include "nsorch/ga.hpp"
#include "nsorch/orchestrator.hpp"

using namespace nsorch;

namespace {

constexpr double G = 1e9;

struct PopulationCase {
  Topology topology = build_builtin("garr");
  std::vector<FlowPath> flows;
  std::vector<DemandVector> demands;
  std::vector<std::vector<double>> population;

  PopulationCase() {
    const auto acc = topology.access_nodes();
    for (std::size_t i = 0; i < 6; ++i) {
      const SliceClass cls = i % 2 ? SliceClass::urllc : SliceClass::embb;
      flows.push_back({cls, topology.route(acc[i], acc[(i + 5) % acc.size()])});
      demands.push_back({(i % 2 ? 6.0 : 20.0) * G, 75 * G, 75 * G, i % 2 ? 1e-3 : 20e-3});
    }
  }
};

void run_population(benchmark::State& state, Execution exec) {
  PopulationCase c;
  const FlowLayout layout(c.topology, c.flows);
  const PerformanceModel pm;
  const StaticFitness fitness(c.topology, layout, pm, c.demands, 0.1);
  const GenomeCodec codec(c.topology, layout);
  std::mt19937_64 rng(1);
  std::vector<std::vector<double>> pop(static_cast<std::size_t>(state.range(0)));
  for (auto& g : pop) {
    g.resize(codec.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::uniform_real_distribution<double>(0.0, codec.upper_bound(i))(rng);
    codec.repair(g);
  }
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_population(fitness, codec, pop, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PopulationSerial(benchmark::State& s) { run_population(s, Execution::serial); }
void BM_PopulationParallel(benchmark::State& s) { run_population(s, Execution::parallel); }
BENCHMARK(BM_PopulationSerial)->Arg(64)->Arg(256);
BENCHMARK(BM_PopulationParallel)->Arg(64)->Arg(256);

void run_evaluate(benchmark::State& state, Execution exec) {
  ExperimentConfig cfg = paper_preset();
  cfg.topology.builtin = "pyramid";
  const Scenario scn = make_scenario(cfg);
  const EmpiricalStrategy s;
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(scn, s, 0, n, 1, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EvaluateSerial(benchmark::State& s) { run_evaluate(s, Execution::serial); }
void BM_EvaluateParallel(benchmark::State& s) { run_evaluate(s, Execution::parallel); }
BENCHMARK(BM_EvaluateSerial)->Arg(32);
BENCHMARK(BM_EvaluateParallel)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
