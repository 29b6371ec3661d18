#include <benchmark/benchmark.h>

#include "bench_support.hpp"
#include "recdata/checksum.hpp"
#include "recdata/io.hpp"

namespace {

void BM_ReadTabular(benchmark::State& state) {
  const std::string text =
      bench::synthetic_tabular_text(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        recdata::read_dataset_text(text, recdata::FormatSpec::tabular()));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(text.size()) *
                          state.iterations());
}
BENCHMARK(BM_ReadTabular)->Arg(10000)->Arg(100000);

void BM_WriteJsonLines(benchmark::State& state) {
  const recdata::Dataset d =
      bench::synthetic_dataset(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        recdata::write_dataset_text(d, recdata::FormatSpec::json()));
  }
  state.SetItemsProcessed(state.range(0) * state.iterations());
}
BENCHMARK(BM_WriteJsonLines)->Arg(10000)->Arg(100000);

void BM_CanonicalChecksum(benchmark::State& state) {
  const recdata::Dataset d =
      bench::synthetic_dataset(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(recdata::checksum(d));
  }
  state.SetItemsProcessed(state.range(0) * state.iterations());
}
BENCHMARK(BM_CanonicalChecksum)->Arg(10000)->Arg(100000);

}  // namespace
