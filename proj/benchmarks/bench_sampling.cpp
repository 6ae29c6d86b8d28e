#include <benchmark/benchmark.h>

#include <cmath>

#include "gkm/graph.hpp"
#include "gkm/graphon.hpp"

namespace {

void BM_SampleErdosRenyi(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto barW = gkm::truncate_project(gkm::graphons::erdos_renyi(), n, std::pow(n, -0.25));
  std::uint64_t trial = 0;
  for (auto _ : state) {
    auto G = gkm::sample_random(barW, {n, 0.25, true, 42, trial++});
    benchmark::DoNotOptimize(G.nonzeros());
  }
}
BENCHMARK(BM_SampleErdosRenyi)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_TruncateProjectPowerLaw(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto W = gkm::graphons::power_law(0.4);
  for (auto _ : state) {
    auto S = gkm::truncate_project(W, n, std::pow(static_cast<double>(n), -0.45));
    benchmark::DoNotOptimize(S.values().data());
  }
}
BENCHMARK(BM_TruncateProjectPowerLaw)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_ProjectSmallWorld(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto W = gkm::graphons::small_world(0.1, 0.2);
  for (auto _ : state) {
    auto S = gkm::project(W, n);
    benchmark::DoNotOptimize(S.values().data());
  }
}
BENCHMARK(BM_ProjectSmallWorld)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
