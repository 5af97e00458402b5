#include "waitk/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace waitk {

ActionTrace shift_trace_for_window(const ActionTrace& mt_trace, int window, int stream_len,
                                   const Segmentation& seg, int src_total) {
  if (window < 0) throw ConfigError("shift_trace_for_window: window must be >= 0");
  ActionTrace joint;
  int time = 0;
  int consumed = 0;
  auto consume = [&]() {
    if (consumed >= stream_len) return;  // segmenter buffer drains at stream end
    ++consumed;
    const int sent = consumed <= src_total ? sentence_of(seg, Side::source, consumed)
                                           : seg.sentence_count();
    joint.events.push_back({time++, Action::read, consumed, sent});
  };
  for (int i = 0; i < window; ++i) consume();
  for (const auto& ev : mt_trace.events) {
    if (ev.action == Action::read) {
      consume();
    } else {
      joint.events.push_back({time++, Action::write, ev.pos, ev.sentence});
    }
  }
  return joint;
}

namespace {

/// Latency segmentation from the source-side sentence lengths and the
/// MWER-derived hypothesis boundaries. An empty hypothesis segment has no
/// target positions to score, so its source span merges into the following
/// sentence (or the preceding one at the stream end).
void latency_segmentation(const std::vector<int>& src_lens, const std::vector<int>& hyp_starts,
                          int hyp_len, std::vector<int>& out_src_lens,
                          std::vector<int>& out_tgt_lens) {
  const int n = static_cast<int>(src_lens.size());
  std::vector<int> tgt_lens(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    const int start = hyp_starts[static_cast<std::size_t>(i)];
    const int end = i + 1 < n ? hyp_starts[static_cast<std::size_t>(i + 1)] : hyp_len + 1;
    tgt_lens[static_cast<std::size_t>(i)] = end - start;
  }
  out_src_lens.clear();
  out_tgt_lens.clear();
  int src_carry = 0;
  for (int i = 0; i < n; ++i) {
    const int s = src_lens[static_cast<std::size_t>(i)] + src_carry;
    if (tgt_lens[static_cast<std::size_t>(i)] == 0) {
      src_carry = s;
      continue;
    }
    out_src_lens.push_back(s);
    out_tgt_lens.push_back(tgt_lens[static_cast<std::size_t>(i)]);
    src_carry = 0;
  }
  if (src_carry > 0 && !out_src_lens.empty()) out_src_lens.back() += src_carry;
  if (out_src_lens.empty()) throw DataError("latency_segmentation: empty hypothesis");
}

}  // namespace

RunReport run_pipeline(const Checkpoint& model, const SegmenterCheckpoint* segmenter,
                       const Vocabulary& vocab, const TokenStream& src,
                       const std::vector<int>& line_boundaries,
                       const std::vector<std::vector<std::string>>& refs,
                       const PipelineOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  if (src.length() == 0) throw DataError("run_pipeline: empty stream");
  if (refs.empty()) throw DataError("run_pipeline: no references");
  options.policy.validate();
  if (!options.oracle_segmenter && segmenter == nullptr)
    throw ConfigError("run_pipeline: segmenter parameters required unless oracle mode");
  if (!options.oracle_segmenter && segmenter->config.vocab_size != model.config.vocab_size)
    throw ConfigError("run_pipeline: segmenter/model vocabulary size mismatch");

  // 1. sentence boundaries over the source stream
  std::vector<int> boundaries;
  int window = options.future_window;
  if (options.oracle_segmenter) {
    boundaries = line_boundaries;
  } else {
    SegmenterConfig seg_config = segmenter->config;
    window = seg_config.future_window;  // the trained window defines the pipeline delay
    boundaries = segment_stream(segmenter->params, seg_config, vocab, src);
  }

  // 2. wait-k greedy decode; the MT-coordinate trace is independent of w
  DecodeOptions decode_options;
  decode_options.policy = options.policy;
  decode_options.history_tokens = options.history_tokens;
  const DecodeResult decoded =
      greedy_stream_decode(model.params, model.config, vocab, src, boundaries, decode_options);

  RunReport report;
  report.mt_trace = decoded.trace;
  report.output_tokens = decoded.output.tokens;
  report.joint_trace = shift_trace_for_window(decoded.trace, window, src.length(),
                                              decoded.segmentation, src.length());

  // 3. MWER resegmentation of the output stream against the references
  const ResegmentationResult reseg = mwer_resegment(decoded.output.tokens, refs);
  report.mwer_cost = reseg.total_cost;
  std::vector<std::vector<std::string>> hyp_sentences;
  for (int n = 1; n <= static_cast<int>(refs.size()); ++n) {
    hyp_sentences.push_back(reseg.segment(decoded.output.tokens, n));
    report.segmented_hyp_lines.push_back(join_tokens(hyp_sentences.back()));
  }

  // 4. quality
  report.bleu = corpus_bleu(hyp_sentences, refs, options.bleu);

  // 5. stream-adapted latency on the joint trace. The evaluation segmentation
  //    is reference-relative on both sides: source sentence spans come from
  //    the stream's own segment boundaries, target spans from the MWER split.
  //    The segmenter only influences the trace, not the evaluation frame.
  {
    const std::vector<int> joint_delays = report.joint_trace.global_delays();
    std::vector<int> ref_src_lens;
    int prev = 0;
    for (const int end : line_boundaries) {
      if (end <= prev || end > src.length())
        throw DataError("run_pipeline: bad source segment boundaries");
      ref_src_lens.push_back(end - prev);
      prev = end;
    }
    if (prev < src.length()) ref_src_lens.push_back(src.length() - prev);
    if (refs.size() != ref_src_lens.size())
      throw DataError("run_pipeline: reference count differs from source segment count");
    std::vector<int> lat_src, lat_tgt;
    latency_segmentation(ref_src_lens, reseg.boundaries,
                         static_cast<int>(decoded.output.tokens.size()), lat_src, lat_tgt);
    const Segmentation lat_seg = Segmentation::from_lengths(lat_src, lat_tgt);
    report.latency = stream_metrics(joint_delays, lat_seg, src.length(),
                                    static_cast<int>(decoded.output.tokens.size()), {},
                                    options.metrics);
  }

  nlohmann::json cfg;
  cfg["k"] = options.policy.k;
  cfg["gamma"] = options.policy.gamma.value();
  cfg["history_tokens"] =
      options.history_tokens >= 0 ? options.history_tokens : model.config.history;
  cfg["window"] = window;
  cfg["oracle_segmenter"] = options.oracle_segmenter;
  cfg["encoder_kind"] = to_string(model.config.encoder_kind);
  cfg["dal_scale"] = options.metrics.dal_scale;
  cfg["seed"] = options.seed;
  report.config_json = cfg.dump();

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

std::string RunReport::to_json() const {
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(config_json);
  j["bleu"] = nlohmann::json::parse(bleu.to_json());
  j["latency"] = {{"ap", latency.aggregate.ap},
                  {"al", latency.aggregate.al},
                  {"dal", latency.aggregate.dal}};
  nlohmann::json sentences = nlohmann::json::array();
  for (const auto& s : latency.per_sentence)
    sentences.push_back({{"ap", s.ap}, {"al", s.al}, {"dal", s.dal}});
  j["latency"]["per_sentence"] = std::move(sentences);
  j["mwer_cost"] = mwer_cost;
  if (!mt_trace_file.empty()) j["mt_trace_file"] = mt_trace_file;
  if (!joint_trace_file.empty()) j["joint_trace_file"] = joint_trace_file;
  j["output"] = join_tokens(output_tokens);
  j["segmented_hypothesis"] = segmented_hyp_lines;
  j["wall_seconds"] = wall_seconds;
  return j.dump(2);
}

std::string RunReport::to_csv() const {
  std::ostringstream out;
  out.precision(10);
  out << "metric,value\n";
  out << "bleu," << bleu.score * 100.0 << '\n';
  out << "ap," << latency.aggregate.ap << '\n';
  out << "al," << latency.aggregate.al << '\n';
  out << "dal," << latency.aggregate.dal << '\n';
  out << "mwer_cost," << mwer_cost << '\n';
  return out.str();
}

void emit_report(const RunReport& report, ReportFormat format, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  switch (format) {
    case ReportFormat::json:
      out << report.to_json() << '\n';
      break;
    case ReportFormat::csv:
      out << report.to_csv();
      break;
    case ReportFormat::plot_data:
      throw ConfigError("plot-data needs a sweep; use plot_data() over sweep points");
  }
}

std::string plot_data(const std::vector<SweepPoint>& points, bool use_dal) {
  std::map<int, std::vector<SweepPoint>> by_window;
  for (const auto& p : points) by_window[p.window].push_back(p);
  std::ostringstream out;
  out.precision(10);
  for (auto& [w, series] : by_window) {
    std::sort(series.begin(), series.end(),
              [](const SweepPoint& a, const SweepPoint& b) { return a.k < b.k; });
    out << "# w=" << w << " columns: k " << (use_dal ? "DAL" : "AL") << " BLEU\n";
    for (const auto& p : series)
      out << p.k << '\t' << (use_dal ? p.dal : p.al) << '\t' << p.bleu << '\n';
    out << '\n';
  }
  return out.str();
}

}  // namespace waitk
