#include "waitk/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace waitk {

void SegmenterConfig::validate() const {
  if (history_len < 0) throw ConfigError("SegmenterConfig: history_len must be >= 0");
  if (future_window < 0) throw ConfigError("SegmenterConfig: future_window must be >= 0");
  if (embedding_dim < 1 || hidden_dim < 1) throw ConfigError("SegmenterConfig: bad dims");
  if (vocab_size < markers::kReservedCount)
    throw ConfigError("SegmenterConfig: vocab_size must cover the reserved tokens");
  if (split_threshold <= 0.0 || split_threshold >= 1.0)
    throw ConfigError("SegmenterConfig: threshold must be in (0, 1)");
}

void SegmenterParams::init(const SegmenterConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const int in_dim = config.window_tokens() * config.embedding_dim;
  embedding.init("embedding", config.vocab_size, config.embedding_dim,
                 1.0 / std::sqrt(static_cast<double>(config.embedding_dim)), rng);
  w1.init("w1", in_dim, config.hidden_dim, 1.0 / std::sqrt(static_cast<double>(in_dim)), rng);
  b1.init("b1", 1, config.hidden_dim, 0.0, rng);
  w2.init("w2", config.hidden_dim, config.hidden_dim,
          1.0 / std::sqrt(static_cast<double>(config.hidden_dim)), rng);
  b2.init("b2", 1, config.hidden_dim, 0.0, rng);
  w3.init("w3", config.hidden_dim, 2, 1.0 / std::sqrt(static_cast<double>(config.hidden_dim)),
          rng);
  b3.init("b3", 1, 2, 0.0, rng);
}

std::vector<Param*> SegmenterParams::all() {
  return {&embedding, &w1, &b1, &w2, &b2, &w3, &b3};
}

namespace {

/// Window token ids for the decision at 0-based position t; out-of-range
/// positions pad.
std::vector<TokenId> window_ids(const std::vector<TokenId>& stream, int t,
                                const SegmenterConfig& config) {
  std::vector<TokenId> ids;
  ids.reserve(static_cast<std::size_t>(config.window_tokens()));
  for (int off = -config.history_len; off <= config.future_window; ++off) {
    const int p = t + off;
    ids.push_back(p >= 0 && p < static_cast<int>(stream.size())
                      ? stream[static_cast<std::size_t>(p)]
                      : markers::kPad);
  }
  return ids;
}

struct SegForwardCache {
  std::vector<std::vector<TokenId>> windows;
  Matrix features, h1_pre, h1, h2_pre, h2, logits;
};

Matrix seg_forward(const SegmenterParams& params, const SegmenterConfig& config,
                   const std::vector<std::vector<TokenId>>& windows, SegForwardCache& cache) {
  const int n = static_cast<int>(windows.size());
  const int e = config.embedding_dim;
  cache.windows = windows;
  cache.features = Matrix(n, config.window_tokens() * e);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < config.window_tokens(); ++t) {
      const TokenId id = windows[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
      for (int j = 0; j < e; ++j)
        cache.features.at(i, t * e + j) = params.embedding.value.at(id, j);
    }
  cache.h1_pre = linear_forward(cache.features, params.w1, params.b1);
  cache.h1 = gelu_forward(cache.h1_pre);
  cache.h2_pre = linear_forward(cache.h1, params.w2, params.b2);
  cache.h2 = gelu_forward(cache.h2_pre);
  cache.logits = linear_forward(cache.h2, params.w3, params.b3);
  return cache.logits;
}

void seg_backward(SegmenterParams& params, const SegmenterConfig& config,
                  const SegForwardCache& cache, const Matrix& dlogits) {
  const Matrix dh2 = linear_backward(cache.h2, params.w3, params.b3, dlogits);
  const Matrix dh2_pre = gelu_backward(cache.h2_pre, dh2);
  const Matrix dh1 = linear_backward(cache.h1, params.w2, params.b2, dh2_pre);
  const Matrix dh1_pre = gelu_backward(cache.h1_pre, dh1);
  const Matrix dfeat = linear_backward(cache.features, params.w1, params.b1, dh1_pre);
  const int e = config.embedding_dim;
  for (int i = 0; i < dfeat.rows; ++i)
    for (int t = 0; t < config.window_tokens(); ++t) {
      const TokenId id = cache.windows[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
      for (int j = 0; j < e; ++j)
        params.embedding.grad.at(id, j) += dfeat.at(i, t * e + j);
    }
}

}  // namespace

SegmenterParams train_segmenter(const std::vector<std::vector<std::string>>& sentences,
                                const SegmenterConfig& config, const Vocabulary& vocab,
                                const SegmenterTrainOptions& options) {
  config.validate();
  if (sentences.size() < 2) throw DataError("train_segmenter: need at least two sentences");
  if (options.min_split_batch_ratio < 0.0 || options.min_split_batch_ratio > 1.0)
    throw ConfigError("train_segmenter: bad split-batch ratio");

  // flatten to a stream with boundary labels on sentence-final tokens
  std::vector<TokenId> stream;
  std::vector<int> positives, negatives;
  for (const auto& sent : sentences) {
    if (sent.empty()) throw DataError("train_segmenter: empty sentence");
    for (std::size_t i = 0; i < sent.size(); ++i) {
      const int pos = static_cast<int>(stream.size());
      stream.push_back(vocab.lookup(sent[i]));
      (i + 1 == sent.size() ? positives : negatives).push_back(pos);
    }
  }
  if (positives.empty() || negatives.empty())
    throw DataError("train_segmenter: degenerate corpus (needs both classes)");

  SegmenterParams params;
  params.init(config, options.seed);
  Rng rng(options.seed + 1);
  AdamOptimizer::Options adam_opts;
  adam_opts.lr = options.lr;
  adam_opts.warmup_steps = options.warmup_steps;
  AdamOptimizer adam(adam_opts);
  const auto param_ptrs = params.all();

  const int pos_per_batch = std::max(
      1, static_cast<int>(std::ceil(options.min_split_batch_ratio * options.batch_size)));

  for (int step = 0; step < options.steps; ++step) {
    std::vector<std::vector<TokenId>> windows;
    std::vector<std::pair<int, int>> targets;
    for (int b = 0; b < options.batch_size; ++b) {
      const bool positive = b < pos_per_batch;
      const auto& pool = positive ? positives : negatives;
      const int t = pool[static_cast<std::size_t>(rng.below(pool.size()))];
      windows.push_back(window_ids(stream, t, config));
      targets.emplace_back(b, positive ? 1 : 0);
    }
    for (auto p : param_ptrs) p->zero_grad();
    SegForwardCache cache;
    const Matrix logits = seg_forward(params, config, windows, cache);
    Matrix dlogits;
    const double loss = smoothed_cross_entropy(logits, targets, 0.0, dlogits,
                                               1.0 / options.batch_size);
    if (!std::isfinite(loss))
      throw DataError("train_segmenter: loss diverged at step " + std::to_string(step));
    seg_backward(params, config, cache, dlogits);
    adam.step(param_ptrs);
  }
  return params;
}

std::vector<double> split_probabilities(const SegmenterParams& params,
                                        const SegmenterConfig& config,
                                        const std::vector<TokenId>& stream) {
  std::vector<std::vector<TokenId>> windows;
  for (int t = 0; t < static_cast<int>(stream.size()); ++t)
    windows.push_back(window_ids(stream, t, config));
  SegForwardCache cache;
  const Matrix logits = seg_forward(params, config, windows, cache);
  const Matrix probs = softmax_rows(logits);
  std::vector<double> out;
  for (int i = 0; i < probs.rows; ++i) out.push_back(probs.at(i, 1));
  return out;
}

std::vector<int> segment_stream(const SegmenterParams& params, const SegmenterConfig& config,
                                const Vocabulary& vocab, const TokenStream& stream) {
  config.validate();
  if (stream.length() == 0) throw DataError("segment_stream: empty stream");
  const auto probs = split_probabilities(params, config, stream.ids(vocab));
  std::vector<int> boundaries;
  for (int t = 1; t <= stream.length(); ++t) {
    if (t == stream.length()) break;  // the stream end closes the final sentence
    if (probs[static_cast<std::size_t>(t - 1)] > config.split_threshold) boundaries.push_back(t);
  }
  return boundaries;
}

std::vector<int> oracle_boundaries(const std::vector<int>& sentence_lens) {
  std::vector<int> out;
  int pos = 0;
  for (const int len : sentence_lens) {
    if (len < 1) throw DataError("oracle_boundaries: sentence lengths must be >= 1");
    pos += len;
    out.push_back(pos);
  }
  return out;
}

double boundary_f1(const std::vector<int>& predicted, const std::vector<int>& reference) {
  if (reference.empty()) throw DataError("boundary_f1: empty reference");
  int hits = 0;
  std::size_t i = 0, j = 0;
  while (i < predicted.size() && j < reference.size()) {
    if (predicted[i] == reference[j]) {
      ++hits;
      ++i;
      ++j;
    } else if (predicted[i] < reference[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  if (predicted.empty() || hits == 0) return 0.0;
  const double precision = static_cast<double>(hits) / static_cast<double>(predicted.size());
  const double recall = static_cast<double>(hits) / static_cast<double>(reference.size());
  return 2.0 * precision * recall / (precision + recall);
}

void save_segmenter(const std::string& path, const SegmenterParams& params,
                    const SegmenterConfig& config, const Vocabulary& vocab) {
  if (static_cast<int>(vocab.size()) != config.vocab_size)
    throw ConfigError("save_segmenter: vocabulary size differs from config");
  nlohmann::json j;
  j["format"] = "waitk-segmenter-1";
  {
    std::vector<std::string> surfaces;
    for (TokenId id = 0; id < static_cast<TokenId>(vocab.size()); ++id)
      surfaces.push_back(vocab.surface(id));
    j["vocab"] = std::move(surfaces);
  }
  j["config"] = {
      {"history_len", config.history_len},     {"future_window", config.future_window},
      {"embedding_dim", config.embedding_dim}, {"hidden_dim", config.hidden_dim},
      {"vocab_size", config.vocab_size},       {"split_threshold", config.split_threshold},
  };
  nlohmann::json tensors = nlohmann::json::object();
  for (Param* p : const_cast<SegmenterParams&>(params).all())
    tensors[p->name] = {{"rows", p->value.rows}, {"cols", p->value.cols}, {"data", p->value.a}};
  j["params"] = std::move(tensors);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump();
}

SegmenterCheckpoint load_segmenter(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad segmenter file " + path + ": " + e.what());
  }
  if (j.value("format", "") != "waitk-segmenter-1")
    throw DataError("unsupported segmenter format in " + path);
  SegmenterCheckpoint ckpt;
  const auto& c = j.at("config");
  ckpt.config.history_len = c.at("history_len").get<int>();
  ckpt.config.future_window = c.at("future_window").get<int>();
  ckpt.config.embedding_dim = c.at("embedding_dim").get<int>();
  ckpt.config.hidden_dim = c.at("hidden_dim").get<int>();
  ckpt.config.vocab_size = c.at("vocab_size").get<int>();
  ckpt.config.split_threshold = c.at("split_threshold").get<double>();
  for (const auto& surface : j.at("vocab").get<std::vector<std::string>>())
    ckpt.vocab.add(surface);
  ckpt.params.init(ckpt.config, 0);
  const auto& tensors = j.at("params");
  for (Param* p : ckpt.params.all()) {
    if (!tensors.contains(p->name)) throw DataError("segmenter file missing " + p->name);
    const auto& t = tensors.at(p->name);
    if (t.at("rows").get<int>() != p->value.rows || t.at("cols").get<int>() != p->value.cols)
      throw DataError("segmenter file: shape mismatch for " + p->name);
    p->value.a = t.at("data").get<std::vector<double>>();
  }
  return ckpt;
}

}  // namespace waitk
