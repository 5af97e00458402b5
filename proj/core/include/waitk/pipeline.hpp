#pragma once

#include <optional>
#include <string>
#include <vector>

#include "waitk/bleu.hpp"
#include "waitk/decode.hpp"
#include "waitk/latency.hpp"
#include "waitk/model.hpp"
#include "waitk/resegment.hpp"
#include "waitk/segmenter.hpp"

namespace waitk {

struct PipelineOptions {
  WaitKPolicy policy;
  int history_tokens = -1;   // H at decode time; -1 uses the checkpoint's h
  int future_window = 0;     // segmenter future window w
  bool oracle_segmenter = true;
  LatencyConfig metrics;
  BleuOptions bleu;
  std::uint64_t seed = 0;
};

/// Everything a pipeline run produces. Metrics are recomputable from the
/// persisted traces and outputs; the report itself is derived data.
struct RunReport {
  BleuScore bleu;
  LatencyReport latency;
  ActionTrace mt_trace;     // MT-coordinate trace (w = 0 view)
  ActionTrace joint_trace;  // stream-coordinate trace including segmenter delay
  std::vector<std::string> output_tokens;
  std::vector<std::string> segmented_hyp_lines;
  long mwer_cost = 0;
  std::string config_json;   // snapshot of the options that produced the run
  std::string mt_trace_file; // where the traces were persisted, when they were
  std::string joint_trace_file;
  double wall_seconds = 0.0;

  std::string to_json() const;
  std::string to_csv() const;
};

/// A segmenter with future window w consumes w stream tokens before the MT
/// system sees the first one, then forwards one token per MT READ. This maps
/// an MT-coordinate trace to stream coordinates: w initial READs, every MT
/// READ of position p becomes the stream READ of position p + w while the
/// stream lasts, and writes pass through.
ActionTrace shift_trace_for_window(const ActionTrace& mt_trace, int window, int stream_len,
                                   const Segmentation& seg, int src_total);

/// Runs segmentation, wait-k decoding, MWER resegmentation against the
/// references, BLEU on the resegmented output and stream-adapted latency on
/// the joint trace. `line_boundaries` are the source stream's own segment
/// ends (used by the oracle segmenter). `segmenter` may be null when
/// options.oracle_segmenter is set.
RunReport run_pipeline(const Checkpoint& model, const SegmenterCheckpoint* segmenter,
                       const Vocabulary& vocab, const TokenStream& src,
                       const std::vector<int>& line_boundaries,
                       const std::vector<std::vector<std::string>>& refs,
                       const PipelineOptions& options);

enum class ReportFormat { json, csv, plot_data };

void emit_report(const RunReport& report, ReportFormat format, const std::string& path);

/// One (x = AL or DAL, y = BLEU) series per future-window value, ordered by k.
struct SweepPoint {
  int k = 0;
  int window = 0;
  double al = 0.0;
  double dal = 0.0;
  double ap = 0.0;
  double bleu = 0.0;
};
std::string plot_data(const std::vector<SweepPoint>& points, bool use_dal);

}  // namespace waitk
