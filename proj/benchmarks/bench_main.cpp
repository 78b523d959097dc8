#include <benchmark/benchmark.h>

#include "rgames/streams.hpp"

using namespace rgames;

static void BM_pair_unpair(benchmark::State& state) {
  for (auto _ : state) {
    for (Digit k = 0; k < 1000; ++k) {
      auto [n, m] = unpair(k);
      benchmark::DoNotOptimize(pair_nm(n, m));
    }
  }
}
BENCHMARK(BM_pair_unpair);

BENCHMARK_MAIN();
