#pragma once

#include <string>
#include <vector>

#include "waitk/rational.hpp"
#include "waitk/text.hpp"

namespace waitk {

/// Relative (per-sentence) delays for one sentence: g(i) is the number of
/// source tokens of the stream, counted from this sentence's first source
/// token, that had been read when target token i was written. In stream mode
/// g(i) may exceed src_len (a lagging system keeps reading past the oracle
/// sentence boundary).
struct DelayVector {
  std::vector<int> g;
  Rational gamma = Rational(1, 1);  // per-sentence catch-up factor for the cost terms
  int src_len = 0;
  int tgt_len = 0;

  void validate() const;
};

struct SentenceLatency {
  double ap = 0.0;
  double al = 0.0;
  double dal = 0.0;
};

enum class Aggregation { mean, target_weighted };

struct LatencyConfig {
  double dal_scale = 1.0;  // multiplier on the 1/gamma pacing term in the DAL recurrence
  Aggregation aggregation = Aggregation::mean;
};

struct LatencyReport {
  std::vector<SentenceLatency> per_sentence;
  SentenceLatency aggregate;
  LatencyConfig config;
  bool stream_mode = false;

  std::string to_csv() const;
};

/// Splits global delays into per-sentence relative delays:
/// g_n(i) = G(i + b_n - 1) - a_n + 1, so that a single-sentence stream gives
/// g = G unchanged.
std::vector<DelayVector> relative_delays(const std::vector<int>& global_delays,
                                         const Segmentation& seg, int src_total,
                                         int tgt_total);

/// Average proportion: sum_i g(i) / (src_len * tgt_len).
double ap(const DelayVector& d);

/// Average lagging: (1/tau) sum_{i<=tau} [g(i) - (i-1)/gamma] with
/// tau = min{ i : g(i) >= src_len }. When no delay reaches the source length
/// (an under-generating schedule) tau falls back to tgt_len.
double al(const DelayVector& d);

/// Differentiable average lagging: (1/tgt_len) sum_i [g'(i) - (i-1)/gamma]
/// with g'(1) = g(1) and g'(i) = max(g(i), g'(i-1) + s/gamma).
double dal(const DelayVector& d, double scale = 1.0);

/// Stream-adapted metrics: per-sentence AP/AL/DAL over relative delays, with
/// the DAL pacing clock carried across sentence boundaries. The carry rebases
/// the previous sentence's final g' into the next sentence's frame:
///   g'_n(1) = max(g_n(1), g'_{n-1}(tgt_len_{n-1}) - src_len_{n-1} + s/gamma_{n-1})
/// which reduces exactly to the sentence-level recurrence whenever the clock
/// is not ahead of the next sentence's first delay. per_sentence_gamma may be
/// empty, in which case the oracle rate tgt_len_n/src_len_n is used.
LatencyReport stream_metrics(const std::vector<int>& global_delays, const Segmentation& seg,
                             int src_total, int tgt_total,
                             const std::vector<Rational>& per_sentence_gamma,
                             const LatencyConfig& config = {});

/// Sentence-level report for a single sentence (no cross-sentence carry).
LatencyReport sentence_metrics(const DelayVector& d, const LatencyConfig& config = {});

}  // namespace waitk
