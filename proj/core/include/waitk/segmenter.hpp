#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "waitk/nn.hpp"
#include "waitk/text.hpp"

namespace waitk {

/// Sliding-window boundary classifier over the source stream. The decision
/// for token t uses the embeddings of the last history_len tokens, the token
/// itself and w future tokens, concatenated through two feed-forward layers
/// into a binary split/no-split output.
struct SegmenterConfig {
  int history_len = 10;
  int future_window = 0;      // w; the decision for token t is available at t + w
  int embedding_dim = 16;
  int hidden_dim = 64;
  int vocab_size = 0;
  double split_threshold = 0.5;

  int window_tokens() const { return history_len + 1 + future_window; }
  void validate() const;
};

struct SegmenterParams {
  Param embedding;      // vocab x embedding_dim
  Param w1, b1, w2, b2; // two feed-forward layers
  Param w3, b3;         // 2-class output

  void init(const SegmenterConfig& config, std::uint64_t seed);
  std::vector<Param*> all();
};

struct SegmenterTrainOptions {
  int steps = 400;
  int batch_size = 32;
  double lr = 2e-3;
  int warmup_steps = 40;
  double min_split_batch_ratio = 0.3;  // lower bound on split samples per batch
  std::uint64_t seed = 1;
};

/// Trains on sentence-per-line data: the stream is the concatenation of the
/// sentences, each sentence-final token is a positive example. Batches are
/// drawn with at least min_split_batch_ratio positives. Deterministic per
/// seed; rejects corpora with fewer than two sentences.
SegmenterParams train_segmenter(const std::vector<std::vector<std::string>>& sentences,
                                const SegmenterConfig& config, const Vocabulary& vocab,
                                const SegmenterTrainOptions& options);

/// Split probability for every stream position, in order. Windows at the
/// stream edges are padded with <PAD>.
std::vector<double> split_probabilities(const SegmenterParams& params,
                                        const SegmenterConfig& config,
                                        const std::vector<TokenId>& stream);

/// Boundary positions (sentence-final tokens) for the stream: one decision
/// per token at threshold split_threshold; the decision for token t is only
/// available once token t + w has been read. The final position is never
/// emitted as a boundary by itself (the stream end closes the last sentence).
std::vector<int> segment_stream(const SegmenterParams& params, const SegmenterConfig& config,
                                const Vocabulary& vocab, const TokenStream& stream);

/// Reference boundaries from known sentence lengths (the oracle segmenter).
std::vector<int> oracle_boundaries(const std::vector<int>& sentence_lens);

/// Precision/recall F1 over boundary position sets.
double boundary_f1(const std::vector<int>& predicted, const std::vector<int>& reference);

void save_segmenter(const std::string& path, const SegmenterParams& params,
                    const SegmenterConfig& config, const Vocabulary& vocab);
struct SegmenterCheckpoint {
  SegmenterConfig config;
  SegmenterParams params;
  Vocabulary vocab;
};
SegmenterCheckpoint load_segmenter(const std::string& path);

}  // namespace waitk
