#include <benchmark/benchmark.h>

#include "waitk/latency.hpp"
#include "waitk/policy.hpp"
#include "waitk/rng.hpp"

using namespace waitk;

static void BM_StreamMetrics(benchmark::State& state) {
  const int sentences = static_cast<int>(state.range(0));
  Rng rng(11);
  std::vector<int> x, y;
  for (int i = 0; i < sentences; ++i) {
    x.push_back(static_cast<int>(rng.range(5, 40)));
    y.push_back(static_cast<int>(rng.range(5, 40)));
  }
  const Segmentation seg = Segmentation::from_lengths(x, y);
  const ActionTrace trace = schedule_actions({4, Rational(1, 1)}, seg, x, y);
  const auto delays = trace.global_delays();
  const int src_total = trace.read_count();
  const int tgt_total = trace.write_count();
  for (auto _ : state) {
    benchmark::DoNotOptimize(stream_metrics(delays, seg, src_total, tgt_total, {}));
  }
  state.SetItemsProcessed(state.iterations() * sentences);
}
BENCHMARK(BM_StreamMetrics)->Arg(10)->Arg(100)->Arg(1000);
