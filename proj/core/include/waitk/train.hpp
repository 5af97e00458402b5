#pragma once

#include <cstdint>
#include <vector>

#include "waitk/corpus.hpp"
#include "waitk/model.hpp"

namespace waitk {

/// Maps a surface-form sample onto vocabulary ids and derives its in-sample
/// segmentation from the markers.
Sample sample_from_surfaces(const StreamingSample& sample, const Vocabulary& vocab);
std::vector<Sample> samples_from_streaming(const std::vector<StreamingSample>& samples,
                                           const Vocabulary& vocab);

struct TrainOptions {
  int steps = 300;
  int batch_size = 8;
  int k_min = 1;
  int k_max = 32;  // k is sampled uniformly per batch
  Rational gamma = Rational(1, 1);
  double lr = 3e-3;
  int warmup_steps = 40;
  std::uint64_t seed = 1;
};

struct TrainResult {
  double initial_loss = 0.0;  // evaluation loss before the first update
  double final_loss = 0.0;    // evaluation loss after the last update
  std::vector<double> batch_losses;
};

/// Held-out style evaluation loss (no gradient step) at a fixed k.
double evaluate_loss(ModelParams& params, const ModelConfig& config,
                     const std::vector<Sample>& samples, int k, const Rational& gamma);

/// Adam with warmup-then-inverse-sqrt learning rate; one uniformly sampled k
/// per batch; deterministic under the seed. Throws DataError if the loss
/// stops being finite.
TrainResult train_multi_k(ModelParams& params, const ModelConfig& config,
                          const std::vector<Sample>& corpus, const TrainOptions& options);

}  // namespace waitk
