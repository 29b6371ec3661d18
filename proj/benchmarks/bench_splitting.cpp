#include <benchmark/benchmark.h>

#include "bench_support.hpp"
#include "recdata/splitting.hpp"

namespace {

void BM_RandomHoldout(benchmark::State& state) {
  const recdata::Dataset d =
      bench::synthetic_dataset(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(recdata::random_holdout(d, 0.2, 0.1, 42));
  }
  state.SetItemsProcessed(state.range(0) * state.iterations());
}
BENCHMARK(BM_RandomHoldout)->Arg(10000)->Arg(100000);

void BM_UserStratifiedHoldout(benchmark::State& state) {
  const recdata::Dataset d =
      bench::synthetic_dataset(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        recdata::random_holdout(d, 0.2, 0.1, 42, recdata::Stratify::user));
  }
  state.SetItemsProcessed(state.range(0) * state.iterations());
}
BENCHMARK(BM_UserStratifiedHoldout)->Arg(10000)->Arg(100000);

void BM_TemporalHoldout(benchmark::State& state) {
  const recdata::Dataset d =
      bench::synthetic_dataset(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(recdata::temporal_split(
        d, recdata::TemporalMode::by_ratio(0.2)));
  }
  state.SetItemsProcessed(state.range(0) * state.iterations());
}
BENCHMARK(BM_TemporalHoldout)->Arg(10000)->Arg(100000);

}  // namespace
