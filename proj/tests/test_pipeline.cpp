#include "doctest.h"
#include "waitk/pipeline.hpp"
#include "waitk/synthetic.hpp"
#include "waitk/train.hpp"

#include "json.hpp"

using namespace waitk;

namespace {

Vocabulary word_vocab(int n) {
  Vocabulary v;
  for (int i = 0; i < n; ++i) v.add("w" + std::to_string(i));
  return v;
}

Checkpoint small_model(int vocab, std::uint64_t seed) {
  Checkpoint ckpt;
  ckpt.config.layers = 1;
  ckpt.config.model_dim = 16;
  ckpt.config.heads = 2;
  ckpt.config.ffn_dim = 32;
  ckpt.config.vocab_size = vocab;
  ckpt.config.encoder_kind = EncoderKind::unidirectional;
  ckpt.params.init(ckpt.config, seed);
  return ckpt;
}

}  // namespace

TEST_CASE("window shift: w initial reads, then one stream token per MT read") {
  const std::vector<int> x{3, 4}, y{3, 3};
  const Segmentation seg = Segmentation::from_lengths(x, y);
  const ActionTrace mt = schedule_actions({2, Rational(1, 1)}, seg, x, y);
  const int stream_len = 7;
  for (const int w : {0, 1, 2, 3, 4}) {
    const ActionTrace joint = shift_trace_for_window(mt, w, stream_len, seg, 7);
    joint.validate();
    for (int i = 0; i < w; ++i) {
      REQUIRE((joint.events[static_cast<std::size_t>(i)].action == Action::read));
      CHECK(joint.events[static_cast<std::size_t>(i)].pos == i + 1);
    }
    const auto base = mt.global_delays();
    const auto shifted = joint.global_delays();
    REQUIRE(base.size() == shifted.size());
    for (std::size_t i = 0; i < base.size(); ++i)
      CHECK(shifted[i] == std::min(base[i] + w, stream_len));
    CHECK(joint.read_count() == std::min(mt.read_count() + w, stream_len));
  }
  // w = 0 is the identity
  const ActionTrace same = shift_trace_for_window(mt, 0, stream_len, seg, 7);
  CHECK(same.global_delays() == mt.global_delays());
}

TEST_CASE("oracle pipeline produces a coherent, recomputable report") {
  const Vocabulary vocab = word_vocab(10);
  const Checkpoint model = small_model(static_cast<int>(vocab.size()), 3);

  TokenStream src;
  for (const char* w : {"w1", "w2", "w3", "w4", "w5", "w6"}) src.tokens.emplace_back(w);
  const std::vector<int> boundaries{3, 6};
  const std::vector<std::vector<std::string>> refs{{"w1", "w2", "w3"}, {"w4", "w5", "w6"}};

  PipelineOptions opts;
  opts.policy = {2, Rational(1, 1)};
  opts.future_window = 2;
  const RunReport report = run_pipeline(model, nullptr, vocab, src, boundaries, refs, opts);

  report.mt_trace.validate();
  report.joint_trace.validate();
  CHECK(report.segmented_hyp_lines.size() == refs.size());

  // recomputability: BLEU from the persisted segmented output
  std::vector<std::vector<std::string>> hyp_sentences;
  for (const auto& line : report.segmented_hyp_lines) hyp_sentences.push_back(tokenize(line));
  CHECK(corpus_bleu(hyp_sentences, refs).score == doctest::Approx(report.bleu.score));

  // recomputability: the joint trace is the shifted MT trace
  const auto joint_delays = report.joint_trace.global_delays();
  const auto mt_delays = report.mt_trace.global_delays();
  for (std::size_t i = 0; i < mt_delays.size(); ++i)
    CHECK(joint_delays[i] == std::min(mt_delays[i] + 2, src.length()));

  const auto parsed = nlohmann::json::parse(report.to_json());
  CHECK(parsed.contains("bleu"));
  CHECK(parsed["config"]["window"] == 2);
  CHECK(parsed["latency"].contains("dal"));
}

TEST_CASE("a trained copy pipeline at high k reaches BLEU 1 and per-sentence AP 1") {
  const SyntheticOptions gen{8, 3, 4, 3, 40};
  const auto corpus = copy_task(gen, 55);
  const Vocabulary vocab = word_vocab(gen.vocab_real);
  const auto samples = samples_from_streaming(build_streaming_samples(corpus, 0), vocab);

  Checkpoint model = small_model(static_cast<int>(vocab.size()), 5);
  model.config.model_dim = 32;
  model.config.ffn_dim = 64;
  model.params.init(model.config, 5);
  TrainOptions topts;
  topts.steps = 400;
  topts.batch_size = 16;
  topts.k_min = 1;
  topts.k_max = 6;
  topts.seed = 13;
  train_multi_k(model.params, model.config, samples, topts);

  TokenStream src;
  for (const char* w : {"w2", "w7", "w1", "w3", "w6", "w4"}) src.tokens.emplace_back(w);
  const std::vector<int> boundaries{3, 6};
  const std::vector<std::vector<std::string>> refs{{"w2", "w7", "w1"}, {"w3", "w6", "w4"}};

  PipelineOptions opts;
  opts.policy = {8, Rational(1, 1)};
  const RunReport report = run_pipeline(model, nullptr, vocab, src, boundaries, refs, opts);
  CHECK(report.bleu.score == doctest::Approx(1.0));
  CHECK(report.mwer_cost == 0);
  for (const auto& s : report.latency.per_sentence) CHECK(s.ap == doctest::Approx(1.0));

  // the latency report is fully recomputable from the persisted artifacts
  const ResegmentationResult reseg = mwer_resegment(report.output_tokens, refs);
  std::vector<int> tgt_lens;
  for (int nn = 1; nn <= static_cast<int>(refs.size()); ++nn)
    tgt_lens.push_back(static_cast<int>(reseg.segment(report.output_tokens, nn).size()));
  const Segmentation lat_seg = Segmentation::from_lengths({3, 3}, tgt_lens);
  const LatencyReport again =
      stream_metrics(report.joint_trace.global_delays(), lat_seg, src.length(),
                     static_cast<int>(report.output_tokens.size()), {});
  CHECK(again.aggregate.ap == report.latency.aggregate.ap);
  CHECK(again.aggregate.al == report.latency.aggregate.al);
  CHECK(again.aggregate.dal == report.latency.aggregate.dal);
}

TEST_CASE("report files are deterministic") {
  const Vocabulary vocab = word_vocab(10);
  const Checkpoint model = small_model(static_cast<int>(vocab.size()), 3);
  TokenStream src;
  for (const char* w : {"w1", "w2", "w3", "w4"}) src.tokens.emplace_back(w);
  const std::vector<std::vector<std::string>> refs{{"w1", "w2"}, {"w3", "w4"}};
  PipelineOptions opts;
  opts.policy = {1, Rational(1, 1)};
  const RunReport a = run_pipeline(model, nullptr, vocab, src, {2, 4}, refs, opts);
  const RunReport b = run_pipeline(model, nullptr, vocab, src, {2, 4}, refs, opts);
  CHECK(a.to_csv() == b.to_csv());
  // JSON differs only in wall-clock metadata
  auto ja = nlohmann::json::parse(a.to_json());
  auto jb = nlohmann::json::parse(b.to_json());
  ja.erase("wall_seconds");
  jb.erase("wall_seconds");
  CHECK(ja == jb);
}

TEST_CASE("plot data groups one series per window value") {
  std::vector<SweepPoint> points;
  for (const int w : {0, 1}) {
    for (const int k : {4, 1, 2}) {
      SweepPoint p;
      p.k = k;
      p.window = w;
      p.al = k + w;
      p.dal = k + w + 0.5;
      p.bleu = 50.0 + k;
      points.push_back(p);
    }
  }
  const std::string al_series = plot_data(points, false);
  CHECK(al_series.find("# w=0") != std::string::npos);
  CHECK(al_series.find("# w=1") != std::string::npos);
  // points are ordered by k within each series
  CHECK(al_series.find("1\t1\t51") < al_series.find("2\t2\t52"));
  CHECK(plot_data(points, true).find("DAL") != std::string::npos);
}

TEST_CASE("pipeline rejects mismatched inputs") {
  const Vocabulary vocab = word_vocab(10);
  const Checkpoint model = small_model(static_cast<int>(vocab.size()), 3);
  TokenStream src;
  src.tokens = {"w1", "w2"};
  PipelineOptions opts;
  opts.policy = {1, Rational(1, 1)};
  opts.oracle_segmenter = false;
  CHECK_THROWS_AS(run_pipeline(model, nullptr, vocab, src, {2}, {{"w1"}}, opts), ConfigError);
  opts.oracle_segmenter = true;
  CHECK_THROWS_AS(run_pipeline(model, nullptr, vocab, TokenStream{}, {}, {{"w1"}}, opts),
                  DataError);
}
