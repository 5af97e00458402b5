#include "waitk/decode.hpp"

#include <algorithm>

#include "waitk/corpus.hpp"

namespace waitk {

std::vector<std::vector<std::string>> DecodeResult::output_sentences() const {
  std::vector<std::vector<std::string>> out;
  int pos = 0;
  for (const int len : tgt_sentence_lens) {
    std::vector<std::string> sent;
    for (int i = 0; i < len; ++i) sent.push_back(output.tokens[static_cast<std::size_t>(pos++)]);
    out.push_back(std::move(sent));
  }
  return out;
}

namespace {

struct DecodedSentence {
  std::vector<TokenId> src;  // real tokens
  std::vector<TokenId> tgt;
};

/// Marker-wrapped model window mirroring the training sample layout:
/// head, sentences joined with <SEP>, optionally a closing marker.
std::vector<TokenId> build_window(TokenId head, const std::vector<const std::vector<TokenId>*>& sentences,
                                  TokenId closing) {
  std::vector<TokenId> out{head};
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    if (s > 0) out.push_back(markers::kSep);
    out.insert(out.end(), sentences[s]->begin(), sentences[s]->end());
  }
  if (closing >= 0) out.push_back(closing);
  return out;
}

/// Source visibility for predicted window position p, mirroring the training
/// sample layout: each sentence restarts the wait-k schedule over its real
/// tokens, a saturated delay reads through the sentence's closing signal, and
/// leading separators see through the source separator. Window sentence m has
/// src_lens[m-1] real source tokens (the last one may still be growing) and a
/// closing marker unless it is the open current sentence.
int window_cross_limit(const std::vector<int>& src_lens, const std::vector<int>& tgt_lens,
                       bool last_closed, int p, const WaitKPolicy& policy, int src_window_len) {
  const int sentences = static_cast<int>(src_lens.size());
  int b_m = 1, a_m = 1, m = 0;
  for (int s = 0; s < sentences; ++s) {
    const int b_next = b_m + tgt_lens[static_cast<std::size_t>(s)] + 1;
    if (p < b_next || s + 1 == sentences) {
      m = s;
      break;
    }
    b_m = b_next;
    a_m += src_lens[static_cast<std::size_t>(s)] + 1;
  }
  int limit;
  if (p == b_m) {
    limit = a_m;  // a sentence-leading marker sees through the source marker
  } else {
    const int rel = p - b_m;
    const int delay = local_delay(policy, rel);
    const int real_len = src_lens[static_cast<std::size_t>(m)];
    const bool has_closing = m + 1 < sentences || last_closed;
    limit = delay >= real_len ? a_m + real_len + (has_closing ? 1 : 0) : a_m + delay;
  }
  return std::min(limit, src_window_len);
}

/// Masks for one decode step. The encoder runs unidirectionally when the
/// model was trained that way and bidirectionally over the available prefix
/// otherwise. Cross attention reproduces the per-position limits the model
/// saw in training, except for bidirectional training, which conditions every
/// row on the current availability.
MaskSet inference_masks(const ModelConfig& config, const WaitKPolicy& policy,
                        const std::vector<int>& src_lens, const std::vector<int>& tgt_lens,
                        bool last_closed, int src_len, int tgt_len) {
  EncoderMaskSpec spec;
  spec.kind = config.encoder_kind == EncoderKind::unidirectional ? EncoderKind::unidirectional
                                                                 : EncoderKind::bidirectional;
  spec.start = 1;
  spec.available = src_len;
  AttentionMask enc = encoder_mask(spec, src_len);
  AttentionMask dec_self(tgt_len, tgt_len);
  for (int q = 1; q <= tgt_len; ++q) dec_self.allow_span(q, {1, q});
  AttentionMask cross(tgt_len, src_len);
  for (int q = 1; q <= tgt_len; ++q) {
    const int limit =
        config.encoder_kind == EncoderKind::bidirectional
            ? src_len
            : window_cross_limit(src_lens, tgt_lens, last_closed, q + 1, policy, src_len);
    cross.allow_span(q, {1, limit});
  }
  return {std::move(enc), std::move(dec_self), std::move(cross)};
}

}  // namespace

DecodeResult greedy_stream_decode(const ModelParams& params, const ModelConfig& config,
                                  const Vocabulary& vocab, const TokenStream& src,
                                  const std::vector<int>& boundaries,
                                  const DecodeOptions& options) {
  config.validate();
  options.policy.validate();
  if (src.length() == 0) throw DataError("greedy_stream_decode: empty stream");
  const int stream_len = src.length();

  std::vector<int> ends = boundaries;
  for (std::size_t i = 0; i < ends.size(); ++i) {
    if (ends[i] < 1 || ends[i] > stream_len || (i > 0 && ends[i] <= ends[i - 1]))
      throw DataError("greedy_stream_decode: bad boundary positions");
  }
  if (ends.empty() || ends.back() != stream_len) ends.push_back(stream_len);

  const std::vector<TokenId> src_ids = src.ids(vocab);
  const int H = options.history_tokens >= 0 ? options.history_tokens : config.history;

  DecodeResult result;
  std::vector<DecodedSentence> done;  // decoded sentences, stream order
  int time = 0;
  int next_read = 1;  // next raw source position to read

  for (std::size_t n = 0; n < ends.size(); ++n) {
    const int end_n = ends[n];

    // History window: as many whole previous sentences as fit in H source
    // tokens, nearest first, plus the matching head marker.
    std::vector<int> lens_before;
    for (const auto& s : done) lens_before.push_back(static_cast<int>(s.src.size()));
    const int admitted = admit_history_pairs(lens_before, H);
    const std::size_t first_hist = done.size() - static_cast<std::size_t>(admitted);
    const TokenId head = (admitted > 0 && first_hist > 0) ? markers::kCont : markers::kDoc;

    DecodedSentence current;
    bool closed = false;
    bool hyp_done = false;
    TokenId closing = -1;

    auto window_sentences = [&](bool target_side) {
      std::vector<const std::vector<TokenId>*> sents;
      for (std::size_t s = first_hist; s < done.size(); ++s)
        sents.push_back(target_side ? &done[s].tgt : &done[s].src);
      sents.push_back(target_side ? &current.tgt : &current.src);
      return sents;
    };

    auto write_token = [&](TokenId id) {
      current.tgt.push_back(id);
      result.trace.events.push_back({time++, Action::write,
                                     static_cast<int>(result.output.tokens.size()) + 1,
                                     static_cast<int>(n) + 1});
      result.output.tokens.push_back(vocab.surface(id));
    };
    auto model_distribution = [&]() {
      const auto src_window = build_window(head, window_sentences(false), closed ? closing : -1);
      const auto tgt_window = build_window(head, window_sentences(true), -1);
      std::vector<int> win_src_lens, win_tgt_lens;
      for (std::size_t s = first_hist; s < done.size(); ++s) {
        win_src_lens.push_back(static_cast<int>(done[s].src.size()));
        win_tgt_lens.push_back(static_cast<int>(done[s].tgt.size()));
      }
      win_src_lens.push_back(static_cast<int>(current.src.size()));
      win_tgt_lens.push_back(static_cast<int>(current.tgt.size()));
      const MaskSet masks =
          inference_masks(config, options.policy, win_src_lens, win_tgt_lens, closed,
                          static_cast<int>(src_window.size()),
                          static_cast<int>(tgt_window.size()));
      return next_token_distribution(params, config, src_window, tgt_window, masks);
    };

    while (!(closed && hyp_done)) {
      const int written = static_cast<int>(current.tgt.size());
      const bool policy_wants_read =
          !closed && (hyp_done || static_cast<int>(current.src.size()) <
                                      local_delay(options.policy, written + 1));
      if (policy_wants_read) {
        current.src.push_back(src_ids[static_cast<std::size_t>(next_read - 1)]);
        result.trace.events.push_back({time++, Action::read, next_read, static_cast<int>(n) + 1});
        if (next_read == end_n) {
          closed = true;
          closing = end_n == stream_len ? markers::kEnd : markers::kBrk;
        }
        ++next_read;
        continue;
      }

      const auto dist = model_distribution();
      TokenId best = -1;
      double best_p = -1.0;
      for (std::size_t v = 0; v < dist.size(); ++v) {
        if (static_cast<TokenId>(v) == markers::kPad) continue;
        // minimum one real token per sentence keeps the output segmentation
        // well formed; markers before the first real token are skipped
        if (written == 0 && Vocabulary::is_reserved(static_cast<TokenId>(v))) continue;
        if (dist[v] > best_p) {
          best_p = dist[v];
          best = static_cast<TokenId>(v);
        }
      }

      const int cap = options.max_target_factor * static_cast<int>(current.src.size()) + 4;
      if (Vocabulary::is_marker(best) || written + 1 > cap) {
        hyp_done = true;
        continue;
      }
      write_token(best);
    }

    result.src_sentence_lens.push_back(static_cast<int>(current.src.size()));
    result.tgt_sentence_lens.push_back(static_cast<int>(current.tgt.size()));
    done.push_back(std::move(current));
  }

  result.segmentation = Segmentation::from_lengths(result.src_sentence_lens,
                                                   result.tgt_sentence_lens);
  return result;
}

}  // namespace waitk
