#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "gkm/dynamics.hpp"
#include "gkm/graph.hpp"

namespace {

std::vector<double> phases(std::size_t n) {
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = 2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(n) + 0.1 * std::sin(7.0 * static_cast<double>(i));
  return u;
}

void run_rhs(benchmark::State& state, const gkm::Model& model) {
  const auto u = phases(model.size());
  std::vector<double> du(model.size());
  gkm::RhsWorkspace ws;
  for (auto _ : state) {
    model.rhs(u, 0.0, du, ws);
    benchmark::DoNotOptimize(du.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(model.size()));
}

void BM_RhsAveraged(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto kernel = std::make_shared<const gkm::StepGraphon>(
      gkm::project(gkm::graphons::power_law(0.4), n));
  run_rhs(state, gkm::Model({gkm::forcings::zero(), gkm::couplings::sine(),
                             gkm::AveragedBackend{kernel}, n}));
}
BENCHMARK(BM_RhsAveraged)->Arg(256)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_RhsRandomGraph(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const gkm::SampleConfig cfg{n, 0.25, true, 1, 0};
  auto graph = std::make_shared<const gkm::WeightedGraph>(
      gkm::sample_random(gkm::graphons::erdos_renyi(), cfg));
  run_rhs(state, gkm::Model({gkm::forcings::zero(), gkm::couplings::sine(),
                             gkm::RandomGraphBackend{graph, cfg.alpha()}, n}));
}
BENCHMARK(BM_RhsRandomGraph)->Arg(256)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

// Per-edge evaluation of a coupling without the harmonic shortcut.
void BM_RhsGenericCoupling(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const gkm::SampleConfig cfg{n, 0.25, true, 1, 0};
  auto graph = std::make_shared<const gkm::WeightedGraph>(
      gkm::sample_random(gkm::graphons::erdos_renyi(), cfg));
  auto D = gkm::couplings::custom("sin-generic", [](double u) { return std::sin(u); }, 1.0);
  run_rhs(state, gkm::Model({gkm::forcings::zero(), D, gkm::RandomGraphBackend{graph, cfg.alpha()}, n}));
}
BENCHMARK(BM_RhsGenericCoupling)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
