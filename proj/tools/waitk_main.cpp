// waitk: streaming translation simulation and evaluation toolkit.
//
// Subcommands compose through files only: corpora and streams are plain text,
// traces are JSON lines, models are JSON checkpoints, reports are JSON/CSV.

#include <atomic>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "waitk/corpus.hpp"
#include "waitk/decode.hpp"
#include "waitk/pipeline.hpp"
#include "waitk/synthetic.hpp"
#include "waitk/train.hpp"

using namespace waitk;

namespace {

std::vector<std::vector<std::string>> read_sentences(const std::string& path) {
  std::vector<std::vector<std::string>> out;
  for (const auto& line : read_lines(path)) {
    auto tokens = tokenize(line);
    if (!tokens.empty()) out.push_back(std::move(tokens));
  }
  return out;
}

std::vector<int> line_end_positions(const std::string& path) {
  std::vector<int> ends;
  int pos = 0;
  for (const auto& line : read_lines(path)) {
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    pos += static_cast<int>(tokens.size());
    ends.push_back(pos);
  }
  return ends;
}

Vocabulary vocab_from_files(const std::vector<std::string>& paths) {
  Vocabulary vocab;
  for (const auto& path : paths)
    for (const auto& line : read_lines(path))
      for (const auto& tok : tokenize(line)) vocab.add(tok);
  return vocab;
}

DocumentCorpus load_corpus(const std::string& src, const std::string& tgt,
                           const std::string& doc_index) {
  return doc_index.empty() ? read_sentence_corpus(src, tgt)
                           : read_document_corpus(src, tgt, doc_index);
}

struct CorpusArgs {
  std::string source, target, doc_index, out_prefix;
  int history = 0;
  int ratio = 3;
  bool mix_sentence_level = false;
  std::uint64_t seed = 1;
};

int cmd_build_corpus(const CorpusArgs& args) {
  const DocumentCorpus corpus = load_corpus(args.source, args.target, args.doc_index);
  auto samples = build_streaming_samples(corpus, args.history);
  if (args.mix_sentence_level) {
    const auto sentence_level = build_streaming_samples(corpus, 0);
    samples = upsample_mix(samples, sentence_level, args.ratio, args.seed);
  }
  std::vector<std::string> src_lines, tgt_lines;
  for (const auto& s : samples) {
    src_lines.push_back(s.source_line());
    tgt_lines.push_back(s.target_line());
  }
  write_lines(args.out_prefix + ".src", src_lines);
  write_lines(args.out_prefix + ".tgt", tgt_lines);
  std::cout << samples.size() << " samples -> " << args.out_prefix << ".{src,tgt}\n";
  return 0;
}

struct TrainToyArgs {
  std::string train_src, train_tgt, out;
  std::string encoder = "unidir";
  int layers = 1, dim = 32, heads = 2, ffn = 64;
  int history = 0;
  int steps = 400, batch = 16;
  int k_min = 1, k_max = 32;
  std::string gamma = "1";
  double lr = 3e-3;
  int warmup = 40;
  double label_smoothing = 0.1;
  bool loss_current_only = false;
  std::uint64_t seed = 1;
};

int cmd_train_toy(const TrainToyArgs& args) {
  const Vocabulary vocab = vocab_from_files({args.train_src, args.train_tgt});
  ModelConfig config;
  config.layers = args.layers;
  config.model_dim = args.dim;
  config.heads = args.heads;
  config.ffn_dim = args.ffn;
  config.vocab_size = static_cast<int>(vocab.size());
  config.encoder_kind = encoder_kind_from_string(args.encoder);
  config.history = args.history;
  config.label_smoothing = args.label_smoothing;
  config.loss_on_history = !args.loss_current_only;

  const auto src_lines = read_lines(args.train_src);
  const auto tgt_lines = read_lines(args.train_tgt);
  if (src_lines.size() != tgt_lines.size())
    throw DataError("training sides have different line counts");
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    StreamingSample s;
    s.source = tokenize(src_lines[i]);
    s.target = tokenize(tgt_lines[i]);
    if (s.source.empty() && s.target.empty()) continue;
    samples.push_back(sample_from_surfaces(s, vocab));
  }

  ModelParams params;
  params.init(config, args.seed);
  TrainOptions opts;
  opts.steps = args.steps;
  opts.batch_size = args.batch;
  opts.k_min = args.k_min;
  opts.k_max = args.k_max;
  opts.gamma = Rational::parse(args.gamma);
  opts.lr = args.lr;
  opts.warmup_steps = args.warmup;
  opts.seed = args.seed;
  const TrainResult result = train_multi_k(params, config, samples, opts);
  save_checkpoint(args.out, params, config, vocab);
  std::cout << "loss " << result.initial_loss << " -> " << result.final_loss << ", saved "
            << args.out << "\n";
  return 0;
}

struct TrainSegmenterArgs {
  std::string corpus, out;
  int window = 0, history_len = 10, embedding = 16, hidden = 64;
  int steps = 400, batch = 32;
  double lr = 2e-3, split_ratio = 0.3, threshold = 0.5;
  std::uint64_t seed = 1;
};

int cmd_train_segmenter(const TrainSegmenterArgs& args) {
  const auto sentences = read_sentences(args.corpus);
  const Vocabulary vocab = vocab_from_files({args.corpus});
  SegmenterConfig config;
  config.history_len = args.history_len;
  config.future_window = args.window;
  config.embedding_dim = args.embedding;
  config.hidden_dim = args.hidden;
  config.vocab_size = static_cast<int>(vocab.size());
  config.split_threshold = args.threshold;
  SegmenterTrainOptions opts;
  opts.steps = args.steps;
  opts.batch_size = args.batch;
  opts.lr = args.lr;
  opts.min_split_batch_ratio = args.split_ratio;
  opts.seed = args.seed;
  const SegmenterParams params = train_segmenter(sentences, config, vocab, opts);
  save_segmenter(args.out, params, config, vocab);
  std::cout << "trained segmenter (w=" << args.window << ") saved to " << args.out << "\n";
  return 0;
}

int cmd_segment(const std::string& model_path, const std::string& stream_path,
                const std::string& out) {
  const SegmenterCheckpoint ckpt = load_segmenter(model_path);
  const TokenStream stream = read_stream_file(stream_path);
  const auto boundaries = segment_stream(ckpt.params, ckpt.config, ckpt.vocab, stream);
  std::vector<std::string> lines;
  for (const int b : boundaries) lines.push_back(std::to_string(b));
  write_lines(out, lines);
  std::cout << boundaries.size() << " boundaries -> " << out << "\n";
  return 0;
}

struct DecodeArgs {
  std::string model, stream, boundaries, out_tokens, out_trace;
  bool boundary_lines = false;
  int k = 1;
  std::string gamma = "1";
  int history = -1;
};

int cmd_decode(const DecodeArgs& args) {
  const Checkpoint ckpt = load_checkpoint(args.model);
  const TokenStream stream = read_stream_file(args.stream);
  std::vector<int> bounds;
  if (args.boundary_lines) {
    bounds = line_end_positions(args.stream);
  } else if (!args.boundaries.empty()) {
    for (const auto& line : read_lines(args.boundaries))
      if (!line.empty()) bounds.push_back(std::stoi(line));
  } else {
    throw ConfigError("decode needs --boundaries FILE or --boundary-lines");
  }
  DecodeOptions opts;
  opts.policy = {args.k, Rational::parse(args.gamma)};
  opts.history_tokens = args.history;
  const DecodeResult result =
      greedy_stream_decode(ckpt.params, ckpt.config, ckpt.vocab, stream, bounds, opts);
  std::vector<std::string> out_lines;
  for (const auto& sent : result.output_sentences()) out_lines.push_back(join_tokens(sent));
  write_lines(args.out_tokens, out_lines);
  write_trace_file(args.out_trace, result.trace);
  std::cout << result.output.tokens.size() << " tokens, trace -> " << args.out_trace << "\n";
  return 0;
}

int cmd_resegment(const std::string& hyp_path, const std::string& ref_path,
                  const std::string& out) {
  const TokenStream hyp = read_stream_file(hyp_path);
  const auto refs = read_sentences(ref_path);
  const ResegmentationResult result = mwer_resegment(hyp.tokens, refs);
  std::vector<std::string> lines;
  for (int n = 1; n <= static_cast<int>(refs.size()); ++n)
    lines.push_back(join_tokens(result.segment(hyp.tokens, n)));
  write_lines(out, lines);
  nlohmann::json j;
  j["total_cost"] = result.total_cost;
  j["boundaries"] = result.boundaries;
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_bleu(const std::string& hyp_path, const std::string& ref_path, bool smooth) {
  const auto hyps = read_sentences(hyp_path);
  const auto refs = read_sentences(ref_path);
  BleuOptions opts;
  opts.smooth_add_one = smooth;
  std::cout << corpus_bleu(hyps, refs, opts).to_json() << "\n";
  return 0;
}

struct LatencyArgs {
  std::string trace, segmentation, out;
  double dal_scale = 1.0;
  bool weighted = false;
};

int cmd_latency(const LatencyArgs& args) {
  const ActionTrace trace = read_trace_file(args.trace);
  const Segmentation seg = read_segmentation_file(args.segmentation);
  LatencyConfig config;
  config.dal_scale = args.dal_scale;
  config.aggregation = args.weighted ? Aggregation::target_weighted : Aggregation::mean;
  const LatencyReport report = stream_metrics(trace.global_delays(), seg, trace.read_count(),
                                              trace.write_count(), {}, config);
  if (args.out.empty()) {
    std::cout << report.to_csv();
  } else {
    std::ofstream f(args.out);
    if (!f) throw DataError("cannot write " + args.out);
    f << report.to_csv();
    std::cout << "report -> " << args.out << "\n";
  }
  return 0;
}

struct RunArgs {
  std::string model, stream, refs, segmenter, outdir = ".";
  std::vector<int> ks{4};
  std::vector<int> windows{0};
  std::string gamma = "1";
  int history = -1;
  double dal_scale = 1.0;
  bool smooth_bleu = false;
  int jobs = 1;
  std::uint64_t seed = 0;
};

int cmd_run(const RunArgs& args) {
  const Checkpoint model = load_checkpoint(args.model);
  SegmenterCheckpoint segmenter;
  const bool oracle = args.segmenter.empty();
  if (!oracle) segmenter = load_segmenter(args.segmenter);
  const TokenStream stream = read_stream_file(args.stream);
  const auto bounds = line_end_positions(args.stream);
  const auto refs = read_sentences(args.refs);

  struct Point {
    int k, w;
  };
  std::vector<Point> grid;
  for (const int w : args.windows)
    for (const int k : args.ks) grid.push_back({k, w});

  std::vector<SweepPoint> sweep(grid.size());
  std::vector<std::string> failures(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= grid.size()) return;
      const Point point = grid[idx];
      try {
        PipelineOptions opts;
        opts.policy = {point.k, Rational::parse(args.gamma)};
        opts.history_tokens = args.history;
        opts.future_window = point.w;
        opts.oracle_segmenter = oracle;
        opts.metrics.dal_scale = args.dal_scale;
        opts.bleu.smooth_add_one = args.smooth_bleu;
        opts.seed = args.seed;
        RunReport report = run_pipeline(model, oracle ? nullptr : &segmenter, model.vocab,
                                        stream, bounds, refs, opts);
        const std::string tag = "_k" + std::to_string(point.k) + "_w" + std::to_string(point.w);
        report.mt_trace_file = args.outdir + "/trace_mt" + tag + ".jsonl";
        report.joint_trace_file = args.outdir + "/trace_joint" + tag + ".jsonl";
        write_trace_file(report.mt_trace_file, report.mt_trace);
        write_trace_file(report.joint_trace_file, report.joint_trace);
        emit_report(report, ReportFormat::json, args.outdir + "/report" + tag + ".json");
        SweepPoint sp;
        sp.k = point.k;
        sp.window = point.w;
        sp.ap = report.latency.aggregate.ap;
        sp.al = report.latency.aggregate.al;
        sp.dal = report.latency.aggregate.dal;
        sp.bleu = report.bleu.score * 100.0;
        sweep[idx] = sp;
      } catch (const std::exception& e) {
        failures[idx] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const int jobs = std::max(1, args.jobs);
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!failures[i].empty())
      throw DataError("grid point k=" + std::to_string(grid[i].k) + " w=" +
                      std::to_string(grid[i].w) + " failed: " + failures[i]);

  std::cout << "k\tw\tBLEU\tAP\tAL\tDAL\n";
  for (const auto& p : sweep)
    std::cout << p.k << '\t' << p.window << '\t' << p.bleu << '\t' << p.ap << '\t' << p.al
              << '\t' << p.dal << "\n";
  if (grid.size() > 1) {
    std::ofstream al_plot(args.outdir + "/plot_al.txt");
    al_plot << plot_data(sweep, false);
    std::ofstream dal_plot(args.outdir + "/plot_dal.txt");
    dal_plot << plot_data(sweep, true);
    std::cout << "plot data -> " << args.outdir << "/plot_{al,dal}.txt\n";
  }
  return 0;
}

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string format = "csv";
  std::string out;
  bool use_dal = false;
};

int cmd_report(const ReportArgs& args) {
  if (args.format == "plot-data") {
    std::vector<SweepPoint> points;
    for (const auto& path : args.inputs) {
      std::ifstream in(path);
      if (!in) throw DataError("cannot open " + path);
      nlohmann::json j;
      in >> j;
      SweepPoint p;
      p.k = j.at("config").at("k").get<int>();
      p.window = j.at("config").at("window").get<int>();
      p.ap = j.at("latency").at("ap").get<double>();
      p.al = j.at("latency").at("al").get<double>();
      p.dal = j.at("latency").at("dal").get<double>();
      p.bleu = j.at("bleu").at("bleu").get<double>();
      points.push_back(p);
    }
    const std::string text = plot_data(points, args.use_dal);
    if (args.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(args.out);
      f << text;
    }
    return 0;
  }
  // csv summary of one or more saved reports
  std::ostringstream csv;
  csv << "file,k,w,bleu,ap,al,dal\n";
  csv.precision(10);
  for (const auto& path : args.inputs) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    nlohmann::json j;
    in >> j;
    csv << path << ',' << j.at("config").at("k").get<int>() << ','
        << j.at("config").at("window").get<int>() << ','
        << j.at("bleu").at("bleu").get<double>() << ','
        << j.at("latency").at("ap").get<double>() << ','
        << j.at("latency").at("al").get<double>() << ','
        << j.at("latency").at("dal").get<double>() << "\n";
  }
  if (args.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream f(args.out);
    f << csv.str();
  }
  return 0;
}

struct MasksArgs {
  std::string kind = "pbe";
  int k = 4, positions = 8, start = 1, available = 0;
  bool streaming = false;
  int G = 0, H = 0;
};

int cmd_masks(const MasksArgs& args) {
  EncoderMaskSpec spec;
  spec.kind = encoder_kind_from_string(args.kind);
  spec.k = args.k;
  spec.start = args.start;
  spec.available = args.available;
  const AttentionMask mask = args.streaming
                                 ? encoder_mask_streaming(spec, args.positions, args.G, args.H)
                                 : encoder_mask(spec, args.positions);
  std::cout << mask.to_grid();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"waitk: streaming translation simulation and evaluation toolkit"};
  app.require_subcommand(1);
  app.set_config("--config");

  CorpusArgs corpus_args;
  auto* build = app.add_subcommand("build-corpus", "build streaming training samples");
  build->add_option("--source", corpus_args.source, "source sentences, one per line")->required();
  build->add_option("--target", corpus_args.target, "target sentences, one per line")->required();
  build->add_option("--doc-index", corpus_args.doc_index,
                    "document line ranges (first last per line); default: one doc per line");
  build->add_option("--history", corpus_args.history, "history token threshold h")->required();
  build->add_flag("--mix-sentence-level", corpus_args.mix_sentence_level,
                  "mix with h=0 samples at the given ratio");
  build->add_option("--ratio", corpus_args.ratio, "streaming:sentence-level ratio bound");
  build->add_option("--seed", corpus_args.seed, "shuffle seed");
  build->add_option("--out-prefix", corpus_args.out_prefix, "output prefix")->required();

  TrainToyArgs toy_args;
  auto* toy = app.add_subcommand("train-toy", "train the toy encoder-decoder");
  toy->add_option("--train-src", toy_args.train_src)->required();
  toy->add_option("--train-tgt", toy_args.train_tgt)->required();
  toy->add_option("--encoder", toy_args.encoder, "bidir|unidir|pbe");
  toy->add_option("--layers", toy_args.layers);
  toy->add_option("--dim", toy_args.dim);
  toy->add_option("--heads", toy_args.heads);
  toy->add_option("--ffn", toy_args.ffn);
  toy->add_option("--history", toy_args.history, "history budget h the data was built with");
  toy->add_option("--steps", toy_args.steps);
  toy->add_option("--batch", toy_args.batch);
  toy->add_option("--k-min", toy_args.k_min);
  toy->add_option("--k-max", toy_args.k_max);
  toy->add_option("--gamma", toy_args.gamma);
  toy->add_option("--lr", toy_args.lr);
  toy->add_option("--warmup", toy_args.warmup);
  toy->add_option("--label-smoothing", toy_args.label_smoothing);
  toy->add_flag("--loss-current-only", toy_args.loss_current_only,
                "score only the current sentence, not the history");
  toy->add_option("--seed", toy_args.seed);
  toy->add_option("--out", toy_args.out, "checkpoint path")->required();

  TrainSegmenterArgs seg_args;
  auto* tseg = app.add_subcommand("train-segmenter", "train the boundary classifier");
  tseg->add_option("--corpus", seg_args.corpus, "sentence-per-line text")->required();
  tseg->add_option("--window", seg_args.window, "future window w");
  tseg->add_option("--history-len", seg_args.history_len);
  tseg->add_option("--embedding", seg_args.embedding);
  tseg->add_option("--hidden", seg_args.hidden);
  tseg->add_option("--steps", seg_args.steps);
  tseg->add_option("--batch", seg_args.batch);
  tseg->add_option("--lr", seg_args.lr);
  tseg->add_option("--split-ratio", seg_args.split_ratio, "minimum split share per batch");
  tseg->add_option("--threshold", seg_args.threshold);
  tseg->add_option("--seed", seg_args.seed);
  tseg->add_option("--out", seg_args.out)->required();

  std::string seg_model, seg_stream, seg_out;
  auto* seg = app.add_subcommand("segment", "emit boundary positions for a stream");
  seg->add_option("--model", seg_model)->required();
  seg->add_option("--stream", seg_stream)->required();
  seg->add_option("--out", seg_out)->required();

  DecodeArgs decode_args;
  auto* dec = app.add_subcommand("decode", "greedy wait-k streaming decode");
  dec->add_option("--model", decode_args.model)->required();
  dec->add_option("--stream", decode_args.stream)->required();
  dec->add_option("--boundaries", decode_args.boundaries, "boundary positions, one per line");
  dec->add_flag("--boundary-lines", decode_args.boundary_lines,
                "use the stream file's line ends as boundaries");
  dec->add_option("--k", decode_args.k);
  dec->add_option("--gamma", decode_args.gamma);
  dec->add_option("--history", decode_args.history, "H at inference; -1 uses the trained h");
  dec->add_option("--out-tokens", decode_args.out_tokens)->required();
  dec->add_option("--out-trace", decode_args.out_trace)->required();

  std::string reseg_hyp, reseg_ref, reseg_out;
  auto* reseg = app.add_subcommand("resegment", "split a hypothesis against references");
  reseg->add_option("--hyp", reseg_hyp)->required();
  reseg->add_option("--ref", reseg_ref)->required();
  reseg->add_option("--out", reseg_out)->required();

  std::string bleu_hyp, bleu_ref;
  bool bleu_smooth = false;
  auto* bleu = app.add_subcommand("bleu", "corpus BLEU of line-aligned files");
  bleu->add_option("--hyp", bleu_hyp)->required();
  bleu->add_option("--ref", bleu_ref)->required();
  bleu->add_flag("--smooth", bleu_smooth, "add-one smoothing for tiny corpora");

  LatencyArgs latency_args;
  auto* lat = app.add_subcommand("latency", "stream-adapted AP/AL/DAL from a trace");
  lat->add_option("--trace", latency_args.trace)->required();
  lat->add_option("--segmentation", latency_args.segmentation, "a_n<TAB>b_n per line")->required();
  lat->add_option("--dal-scale", latency_args.dal_scale);
  lat->add_flag("--weighted", latency_args.weighted, "target-token-weighted aggregation");
  lat->add_option("--out", latency_args.out, "CSV path; stdout when omitted");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "composed segmenter -> policy -> model pipeline");
  run->add_option("--model", run_args.model)->required();
  run->add_option("--stream", run_args.stream, "source stream, one sentence per line")->required();
  run->add_option("--refs", run_args.refs, "references, one per line")->required();
  run->add_option("--segmenter", run_args.segmenter, "segmenter checkpoint; omit for oracle");
  run->add_option("--k", run_args.ks, "wait-k values (grid)");
  run->add_option("--window", run_args.windows, "future windows w (grid, oracle mode)");
  run->add_option("--gamma", run_args.gamma);
  run->add_option("--history", run_args.history);
  run->add_option("--dal-scale", run_args.dal_scale);
  run->add_flag("--smooth-bleu", run_args.smooth_bleu);
  run->add_option("--jobs", run_args.jobs, "parallel grid workers");
  run->add_option("--seed", run_args.seed);
  run->add_option("--outdir", run_args.outdir);

  ReportArgs report_args;
  auto* rep = app.add_subcommand("report", "summarize saved run reports");
  rep->add_option("inputs", report_args.inputs, "report JSON files")->required();
  rep->add_option("--format", report_args.format, "csv|plot-data");
  rep->add_flag("--dal", report_args.use_dal, "plot-data x axis = DAL instead of AL");
  rep->add_option("--out", report_args.out, "output path; stdout when omitted");

  MasksArgs masks_args;
  auto* masks = app.add_subcommand("masks", "print an encoder mask as a 0/1 grid");
  masks->add_option("--kind", masks_args.kind, "bidir|unidir|pbe");
  masks->add_option("--k", masks_args.k);
  masks->add_option("--positions", masks_args.positions);
  masks->add_option("--start", masks_args.start);
  masks->add_option("--available", masks_args.available);
  masks->add_flag("--streaming", masks_args.streaming);
  masks->add_option("--G", masks_args.G);
  masks->add_option("--H", masks_args.H);

  try {
    app.parse(argc, argv);
    if (build->parsed()) return cmd_build_corpus(corpus_args);
    if (toy->parsed()) return cmd_train_toy(toy_args);
    if (tseg->parsed()) return cmd_train_segmenter(seg_args);
    if (seg->parsed()) return cmd_segment(seg_model, seg_stream, seg_out);
    if (dec->parsed()) return cmd_decode(decode_args);
    if (reseg->parsed()) return cmd_resegment(reseg_hyp, reseg_ref, reseg_out);
    if (bleu->parsed()) return cmd_bleu(bleu_hyp, bleu_ref, bleu_smooth);
    if (lat->parsed()) return cmd_latency(latency_args);
    if (run->parsed()) return cmd_run(run_args);
    if (rep->parsed()) return cmd_report(report_args);
    if (masks->parsed()) return cmd_masks(masks_args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
