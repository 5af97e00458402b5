#include <benchmark/benchmark.h>

#include "waitk/model.hpp"

using namespace waitk;

namespace {

ModelConfig bench_config(EncoderKind kind) {
  ModelConfig c;
  c.layers = 2;
  c.model_dim = 32;
  c.heads = 2;
  c.ffn_dim = 64;
  c.vocab_size = 64;
  c.encoder_kind = kind;
  return c;
}

Sample bench_sample(int len) {
  std::vector<TokenId> src{0}, tgt{0};
  for (int i = 0; i < len; ++i) {
    src.push_back(static_cast<TokenId>(7 + i % 50));
    tgt.push_back(static_cast<TokenId>(7 + (i + 1) % 50));
  }
  src.push_back(4);
  tgt.push_back(4);
  return make_sample(std::move(src), std::move(tgt));
}

}  // namespace

static void BM_ForwardPass(benchmark::State& state) {
  const ModelConfig config = bench_config(EncoderKind::pbe);
  ModelParams params;
  params.init(config, 3);
  const Sample sample = bench_sample(static_cast<int>(state.range(0)));
  const MaskSet masks = training_masks(sample, config, 4, Rational(1, 1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(params, config, sample.src, sample.tgt, masks));
  }
}
BENCHMARK(BM_ForwardPass)->Arg(8)->Arg(32);

static void BM_TrainStep(benchmark::State& state) {
  const ModelConfig config = bench_config(EncoderKind::pbe);
  ModelParams params;
  params.init(config, 3);
  TrainingBatch batch;
  batch.k = 4;
  for (int i = 0; i < 8; ++i) batch.samples.push_back(bench_sample(16));
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_and_gradients(params, config, batch));
  }
}
BENCHMARK(BM_TrainStep);

static void BM_IncrementalEncode(benchmark::State& state) {
  const ModelConfig config = bench_config(EncoderKind::unidirectional);
  ModelParams params;
  params.init(config, 3);
  const int len = static_cast<int>(state.range(0));
  for (auto _ : state) {
    IncrementalEncoder enc = incremental_init(config);
    for (int i = 0; i < len; ++i)
      incremental_push(params, config, enc, static_cast<TokenId>(7 + i % 50));
    benchmark::DoNotOptimize(enc.encoded);
  }
  state.SetItemsProcessed(state.iterations() * len);
}
BENCHMARK(BM_IncrementalEncode)->Arg(16)->Arg(64);

static void BM_FullReencode(benchmark::State& state) {
  const ModelConfig config = bench_config(EncoderKind::unidirectional);
  ModelParams params;
  params.init(config, 3);
  const int len = static_cast<int>(state.range(0));
  std::vector<TokenId> tokens;
  for (int i = 0; i < len; ++i) tokens.push_back(static_cast<TokenId>(7 + i % 50));
  EncoderMaskSpec spec;
  spec.kind = EncoderKind::unidirectional;
  for (auto _ : state) {
    // the cost of re-encoding every prefix, what incremental encoding avoids
    for (int j = 1; j <= len; ++j) {
      const std::vector<TokenId> prefix(tokens.begin(), tokens.begin() + j);
      benchmark::DoNotOptimize(encode(params, config, prefix, encoder_mask(spec, j)));
    }
  }
  state.SetItemsProcessed(state.iterations() * len);
}
BENCHMARK(BM_FullReencode)->Arg(16)->Arg(64);
