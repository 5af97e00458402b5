#include "waitk/train.hpp"

#include <cmath>

namespace waitk {

Sample sample_from_surfaces(const StreamingSample& sample, const Vocabulary& vocab) {
  auto to_ids = [&vocab](const std::vector<std::string>& surfaces) {
    std::vector<TokenId> ids;
    ids.reserve(surfaces.size());
    for (const auto& s : surfaces) ids.push_back(vocab.lookup(s));
    return ids;
  };
  return make_sample(to_ids(sample.source), to_ids(sample.target));
}

std::vector<Sample> samples_from_streaming(const std::vector<StreamingSample>& samples,
                                           const Vocabulary& vocab) {
  std::vector<Sample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(sample_from_surfaces(s, vocab));
  return out;
}

double evaluate_loss(ModelParams& params, const ModelConfig& config,
                     const std::vector<Sample>& samples, int k, const Rational& gamma) {
  TrainingBatch batch;
  batch.k = k;
  batch.gamma = gamma;
  const std::size_t cap = std::min<std::size_t>(samples.size(), 32);
  batch.samples.assign(samples.begin(), samples.begin() + static_cast<long>(cap));
  return loss_and_gradients(params, config, batch);
}

TrainResult train_multi_k(ModelParams& params, const ModelConfig& config,
                          const std::vector<Sample>& corpus, const TrainOptions& options) {
  config.validate();
  if (corpus.empty()) throw DataError("train_multi_k: empty corpus");
  if (options.k_min < 1 || options.k_max < options.k_min)
    throw ConfigError("train_multi_k: bad k range");
  if (options.steps < 1 || options.batch_size < 1)
    throw ConfigError("train_multi_k: steps and batch_size must be >= 1");

  Rng rng(options.seed);
  AdamOptimizer::Options adam_opts;
  adam_opts.lr = options.lr;
  adam_opts.warmup_steps = options.warmup_steps;
  AdamOptimizer adam(adam_opts);
  const auto param_ptrs = params.all();

  const int eval_k = options.k_max;
  TrainResult result;
  result.initial_loss = evaluate_loss(params, config, corpus, eval_k, options.gamma);

  for (int step = 0; step < options.steps; ++step) {
    TrainingBatch batch;
    batch.k = static_cast<int>(rng.range(options.k_min, options.k_max));
    batch.gamma = options.gamma;
    for (int b = 0; b < options.batch_size; ++b)
      batch.samples.push_back(corpus[static_cast<std::size_t>(rng.below(corpus.size()))]);

    const double loss = loss_and_gradients(params, config, batch);
    if (!std::isfinite(loss))
      throw DataError("train_multi_k: loss diverged at step " + std::to_string(step) +
                      " (k=" + std::to_string(batch.k) + ", lr=" + std::to_string(adam.current_lr()) + ")");
    result.batch_losses.push_back(loss);
    adam.step(param_ptrs);
  }

  result.final_loss = evaluate_loss(params, config, corpus, eval_k, options.gamma);
  return result;
}

}  // namespace waitk
