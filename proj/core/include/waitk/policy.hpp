#pragma once

#include <string>
#include <vector>

#include "waitk/rational.hpp"
#include "waitk/text.hpp"

namespace waitk {

/// Fixed read/write schedule: read k source tokens, then write target tokens
/// at rate gamma per source token, restarting for every sentence.
struct WaitKPolicy {
  int k = 1;
  Rational gamma = Rational(1, 1);

  void validate() const {
    if (k < 1) throw ConfigError("WaitKPolicy: k must be >= 1");
    if (!gamma.positive()) throw ConfigError("WaitKPolicy: gamma must be positive");
  }
};

enum class Action { read, write };

/// One scheduler step. pos is the source position for READ events and the
/// target position for WRITE events; sentence is the 1-based sentence index
/// the position belongs to. Times are 0-based and dense.
struct ActionEvent {
  int time = 0;
  Action action = Action::read;
  int pos = 0;
  int sentence = 0;
};

/// Time-ordered READ/WRITE log. All latency quantities derive from it.
struct ActionTrace {
  std::vector<ActionEvent> events;

  void validate() const;

  int read_count() const;
  int write_count() const;

  /// Global delay per target position: G(i) = number of READ events strictly
  /// before the WRITE of target i.
  std::vector<int> global_delays() const;

  std::string to_jsonl() const;
  static ActionTrace from_jsonl(const std::string& text);
};

/// g(i) = floor(k + (i-1)/gamma). Relative delay inside one sentence; the
/// caller clamps against the available source (cap_delay).
int local_delay(const WaitKPolicy& policy, int i);

/// G(i) = floor(k + (i - b_n)/gamma) + a_n - 1 with b_n <= i < b_{n+1}.
/// The per-sentence restart of the wait-k schedule over a stream.
int stream_delay(const WaitKPolicy& policy, const Segmentation& seg, int i);

/// min(G_raw, available_src); finite streams end and a delay can never
/// exceed the source actually available.
int cap_delay(int g_raw, int available_src);

/// Simulates the per-sentence wait-k schedule over a stream with known
/// sentence lengths. WRITE of target i happens as soon as its capped delay is
/// satisfied; reads are demand-driven; when a sentence boundary closes, all
/// pending target tokens of the sentence are flushed before the first READ of
/// the next one.
ActionTrace schedule_actions(const WaitKPolicy& policy, const Segmentation& seg,
                             const std::vector<int>& src_lens,
                             const std::vector<int>& tgt_lens);

void write_trace_file(const std::string& path, const ActionTrace& trace);
ActionTrace read_trace_file(const std::string& path);

}  // namespace waitk
