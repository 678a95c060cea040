#include <benchmark/benchmark.h>

#include <cstdint>

#include "rbb/baselines.hpp"
#include "rbb/configuration.hpp"
#include "rbb/graph.hpp"
#include "rbb/process.hpp"
#include "rbb/rng.hpp"

namespace {

using namespace rbb;

void BM_StepAnonymousComplete(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const Graph g = make_complete(n);
  RunRngs rngs = RunRngs::from_seed(7);
  Configuration c = init_config(g, n, Placement::one_per_node(), Mode::anonymous, rngs.order);
  Stepper stepper(g, Strategy::fifo);
  LoadStats stats(c);
  for (auto _ : state) {
    stepper.step(c, rngs, &stats);
    benchmark::DoNotOptimize(stats.max_load());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_StepAnonymousComplete)->Arg(256)->Arg(1024)->Arg(4096);

void BM_StepAnonymousRing(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const Graph g = make_ring(n);
  RunRngs rngs = RunRngs::from_seed(7);
  Configuration c = init_config(g, n, Placement::one_per_node(), Mode::anonymous, rngs.order);
  Stepper stepper(g, Strategy::fifo);
  for (auto _ : state) {
    const auto& moves = stepper.step(c, rngs);
    benchmark::DoNotOptimize(moves.size());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_StepAnonymousRing)->Arg(1024);

void BM_StepTracedFifo(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const Graph g = make_complete(n);
  RunRngs rngs = RunRngs::from_seed(7);
  Configuration c = init_config(g, n, Placement::one_per_node(), Mode::traced, rngs.order);
  Stepper stepper(g, Strategy::fifo);
  for (auto _ : state) {
    const auto& moves = stepper.step(c, rngs);
    benchmark::DoNotOptimize(moves.size());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_StepTracedFifo)->Arg(256)->Arg(1024);

void BM_MemorylessRound(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  RngStream r(42);
  std::vector<std::uint32_t> loads;
  for (auto _ : state) {
    loads = memoryless_step(n, n, r);
    benchmark::DoNotOptimize(loads.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_MemorylessRound)->Arg(1024);

void BM_SampleNeighbor(benchmark::State& state) {
  const Graph g = make_random_regular(1024, 8, 99);
  RngStream r(42);
  std::uint32_t v = 0;
  for (auto _ : state) {
    v = g.sample_neighbor(v, r);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SampleNeighbor);

}  // namespace

BENCHMARK_MAIN();
