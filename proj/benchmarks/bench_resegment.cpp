#include <benchmark/benchmark.h>

#include "waitk/resegment.hpp"
#include "waitk/rng.hpp"

using namespace waitk;

static void BM_MwerResegment(benchmark::State& state) {
  const int sentences = static_cast<int>(state.range(0));
  Rng rng(13);
  std::vector<std::vector<std::string>> refs;
  std::vector<std::string> hyp;
  for (int s = 0; s < sentences; ++s) {
    std::vector<std::string> ref;
    const int len = static_cast<int>(rng.range(8, 25));
    for (int i = 0; i < len; ++i) ref.push_back("t" + std::to_string(rng.below(500)));
    for (const auto& w : ref)
      hyp.push_back(rng.below(10) == 0 ? "t" + std::to_string(rng.below(500)) : w);
    refs.push_back(std::move(ref));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(mwer_resegment(hyp, refs));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(hyp.size()));
}
BENCHMARK(BM_MwerResegment)->Arg(10)->Arg(50)->Arg(200);
