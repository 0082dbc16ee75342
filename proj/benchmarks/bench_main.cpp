#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "rankone/entropy.hpp"
#include "rankone/genericness.hpp"
#include "rankone/stacking.hpp"
#include "rankone/tower.hpp"

using namespace rankone;

namespace {

// Squaring system with five stages: heights 2, 4, 16, 256, 65536, 2^32.
const Tower& squaring_tower() {
  static const Tower t(squaring_heights(2, 5));
  return t;
}

void BM_Decode(benchmark::State& state) {
  const Tower& t = squaring_tower();
  const CodingSpec spec{static_cast<std::size_t>(state.range(0)), CodingMode::base};
  const std::size_t n = t.tower_count();
  const std::uint64_t h = t.height_u64(n);
  std::uint64_t k = 0x9e3779b97f4a7c15ULL % h;
  for (auto _ : state) {
    benchmark::DoNotOptimize(t.decode(spec, n, k));
    k = (k + 0x9e3779b97f4a7c15ULL) % h;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Decode)->Arg(1)->Arg(3)->Arg(5);

void BM_EntropyEnumeration(benchmark::State& state) {
  const Tower t(squaring_heights(2, 4));
  const CodingSpec spec{3, CodingMode::base};
  const std::vector<std::uint64_t> offsets{1, 2, 5, 11, 23};
  EntropyOptions opt;
  opt.enumeration = state.range(0) ? Enumeration::grouped : Enumeration::direct;
  for (auto _ : state) {
    benchmark::DoNotOptimize(empirical_sequence_entropy(t, spec, t.tower_count(), offsets, {}, opt).h_nats);
  }
}
BENCHMARK(BM_EntropyEnumeration)->ArgName("grouped")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GenericnessTrial(benchmark::State& state) {
  GenericnessConfig cfg;
  cfg.base = squaring_heights(2, 3);
  cfg.A = {1, 3, 6, 10};
  cfg.N0 = 1;
  cfg.q = static_cast<std::uint64_t>(state.range(0));
  cfg.alphabet = 2;
  cfg.seed = 7;
  std::uint64_t trial = 0;
  for (auto _ : state) {
    const Stage st = candidate_stage(cfg, trial);
    benchmark::DoNotOptimize(evaluate_candidate(cfg, st, trial).accepted);
    ++trial;
  }
}
BENCHMARK(BM_GenericnessTrial)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
