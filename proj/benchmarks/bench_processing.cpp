#include <benchmark/benchmark.h>

#include "bench_support.hpp"
#include "recdata/processing.hpp"

namespace {

void BM_Binarize(benchmark::State& state) {
  const recdata::Dataset d =
      bench::synthetic_dataset(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        recdata::binarize(d, 3.0, recdata::BinarizeMode::drop_below));
  }
  state.SetItemsProcessed(state.range(0) * state.iterations());
}
BENCHMARK(BM_Binarize)->Arg(100000);

void BM_IterativeKCore(benchmark::State& state) {
  const recdata::Dataset d =
      bench::synthetic_dataset(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        recdata::kcore(d, 5, recdata::KCoreMode::iterative));
  }
  state.SetItemsProcessed(state.range(0) * state.iterations());
}
BENCHMARK(BM_IterativeKCore)->Arg(10000)->Arg(100000);

}  // namespace
