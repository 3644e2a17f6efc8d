#include <benchmark/benchmark.h>

#include "contention/channel.hpp"
#include "contention/engine.hpp"
#include "contention/mpa_codebook.hpp"
#include "contention/prob_core.hpp"
#include "contention/strategies.hpp"

using namespace contention;

static void BM_OptimalThreshold(benchmark::State& state) {
  Region r;
  r.lower = 0.3;
  r.upper = 0.9;
  r.users = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(optimal_threshold(r));
}
BENCHMARK(BM_OptimalThreshold)->Arg(2)->Arg(8)->Arg(32);

static void BM_BuildCodebook(benchmark::State& state) {
  CodebookOptions o;
  o.max_entries = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(build_codebook(static_cast<int>(state.range(0)), o));
}
BENCHMARK(BM_BuildCodebook)->Args({2, 1 << 12})->Args({8, 1 << 12})->Args({8, 1 << 17})
    ->Unit(benchmark::kMillisecond);

static void BM_RunBatch(benchmark::State& state) {
  const auto ch = ChannelModel::iid_uniform(static_cast<int>(state.range(0)));
  const auto st = make_strategy("osa", ch);
  BatchConfig c;
  c.slots = 100'000;
  c.workers = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_batch(ch, st, c));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.slots));
}
BENCHMARK(BM_RunBatch)->Arg(2)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
