#include <benchmark/benchmark.h>

#include "waitk/policy.hpp"
#include "waitk/rng.hpp"

using namespace waitk;

namespace {

struct StreamShape {
  std::vector<int> x, y;
  Segmentation seg;
};

StreamShape random_stream(int sentences, std::uint64_t seed) {
  Rng rng(seed);
  StreamShape s;
  for (int i = 0; i < sentences; ++i) {
    s.x.push_back(static_cast<int>(rng.range(5, 40)));
    s.y.push_back(static_cast<int>(rng.range(5, 40)));
  }
  s.seg = Segmentation::from_lengths(s.x, s.y);
  return s;
}

}  // namespace

static void BM_ScheduleActions(benchmark::State& state) {
  const StreamShape s = random_stream(static_cast<int>(state.range(0)), 7);
  const WaitKPolicy policy{4, Rational(1, 1)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(schedule_actions(policy, s.seg, s.x, s.y));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ScheduleActions)->Arg(10)->Arg(100)->Arg(1000);

static void BM_StreamDelay(benchmark::State& state) {
  const StreamShape s = random_stream(1000, 7);
  const WaitKPolicy policy{4, Rational(3, 2)};
  int tgt_total = 0;
  for (const int len : s.y) tgt_total += len;
  int i = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stream_delay(policy, s.seg, i));
    i = i % tgt_total + 1;
  }
}
BENCHMARK(BM_StreamDelay);

static void BM_TraceJsonRoundTrip(benchmark::State& state) {
  const StreamShape s = random_stream(100, 7);
  const ActionTrace trace = schedule_actions({4, Rational(1, 1)}, s.seg, s.x, s.y);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ActionTrace::from_jsonl(trace.to_jsonl()));
  }
}
BENCHMARK(BM_TraceJsonRoundTrip);

BENCHMARK_MAIN();
