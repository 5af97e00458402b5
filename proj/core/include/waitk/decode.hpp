#pragma once

#include <vector>

#include "waitk/model.hpp"
#include "waitk/policy.hpp"
#include "waitk/text.hpp"

namespace waitk {

struct DecodeOptions {
  WaitKPolicy policy;
  int history_tokens = -1;     // H; -1 uses the model's training-time h
  int max_target_factor = 2;   // per-sentence cap: factor * |x_n| + 4 written tokens
};

struct DecodeResult {
  TokenStream output;               // real target tokens only
  ActionTrace trace;                // raw-token READ/WRITE events
  Segmentation segmentation;        // source starts from boundaries, target starts as decoded
  std::vector<int> src_sentence_lens;
  std::vector<int> tgt_sentence_lens;

  std::vector<std::vector<std::string>> output_sentences() const;
};

/// Greedy streaming decode under the wait-k schedule. `boundaries` lists the
/// source positions after which a sentence ends (the final sentence closes at
/// the stream end if unlisted). The decoder conditions on a marker-wrapped
/// window of at most H real history tokens per side, mirroring the training
/// sample layout; a boundary event closes the source window with <BRK>/<END>
/// and forces the remaining target tokens out. The model signals the end of a
/// sentence hypothesis by emitting any marker token; every sentence emits at
/// least one real token.
DecodeResult greedy_stream_decode(const ModelParams& params, const ModelConfig& config,
                                  const Vocabulary& vocab, const TokenStream& src,
                                  const std::vector<int>& boundaries,
                                  const DecodeOptions& options);

}  // namespace waitk
