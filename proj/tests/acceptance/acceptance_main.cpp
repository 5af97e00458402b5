// Acceptance suite: every criterion prints one [PASS]/[FAIL] line; the
// process exits non-zero if any criterion fails. Oracles here are independent
// re-derivations (enumeration, finite differences, brute force), never the
// code paths they check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "waitk/corpus.hpp"
#include "waitk/decode.hpp"
#include "waitk/latency.hpp"
#include "waitk/masks.hpp"
#include "waitk/model.hpp"
#include "waitk/pipeline.hpp"
#include "waitk/policy.hpp"
#include "waitk/resegment.hpp"
#include "waitk/rng.hpp"
#include "waitk/synthetic.hpp"
#include "waitk/train.hpp"

using namespace waitk;

namespace {

int g_failures = 0;

class Criterion {
 public:
  Criterion(int number, std::string title)
      : number_(number), title_(std::move(title)), start_(std::chrono::steady_clock::now()) {}

  void require(bool ok, const std::string& detail) {
    ++checks_;
    if (!ok && first_failure_.empty()) first_failure_ = detail;
    failed_ |= !ok;
  }

  void note(const std::string& text) { notes_ += text; }

  ~Criterion() {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    if (failed_) {
      ++g_failures;
      std::printf("[FAIL] C%-2d %s: %s (%d checks, %.1fs)%s\n", number_, title_.c_str(),
                  first_failure_.c_str(), checks_, secs, notes_.c_str());
    } else {
      std::printf("[PASS] C%-2d %s (%d checks, %.1fs)%s\n", number_, title_.c_str(), checks_,
                  secs, notes_.c_str());
    }
    std::fflush(stdout);
  }

 private:
  int number_;
  std::string title_;
  std::chrono::steady_clock::time_point start_;
  int checks_ = 0;
  bool failed_ = false;
  std::string first_failure_;
  std::string notes_;
};

AttentionMask enc_mask(EncoderKind kind, int k, int available, int positions) {
  EncoderMaskSpec spec;
  spec.kind = kind;
  spec.k = k;
  spec.available = available;
  return encoder_mask(spec, positions);
}

std::vector<int> span(int lo, int hi) {
  std::vector<int> out;
  for (int p = lo; p <= hi; ++p) out.push_back(p);
  return out;
}

// ---- C1: the attended-set fixture ----------------------------------------

void criterion_1() {
  Criterion c(1, "encoder mask fixture (k=4, j=3, 4 and 5 tokens available)");
  const int J = 5;
  c.require(enc_mask(EncoderKind::bidirectional, 4, 4, J).row_columns(3) == span(1, 4),
            "bidirectional at 4 available");
  c.require(enc_mask(EncoderKind::bidirectional, 4, 5, J).row_columns(3) == span(1, 5),
            "bidirectional at 5 available");
  c.require(enc_mask(EncoderKind::unidirectional, 4, 4, J).row_columns(3) == span(1, 3),
            "unidirectional at 4 available");
  c.require(enc_mask(EncoderKind::unidirectional, 4, 5, J).row_columns(3) == span(1, 3),
            "unidirectional at 5 available");
  c.require(enc_mask(EncoderKind::pbe, 4, 4, J).row_columns(3) == span(1, 4),
            "pbe at 4 available");
  c.require(enc_mask(EncoderKind::pbe, 4, 5, J).row_columns(3) == span(1, 4),
            "pbe at 5 available");
  // the timestep changes only the bidirectional row
  c.require(enc_mask(EncoderKind::unidirectional, 4, 4, J).row_columns(3) ==
                enc_mask(EncoderKind::unidirectional, 4, 5, J).row_columns(3),
            "unidirectional is timestep-invariant");
  c.require(enc_mask(EncoderKind::pbe, 4, 4, J).row_columns(3) ==
                enc_mask(EncoderKind::pbe, 4, 5, J).row_columns(3),
            "pbe is timestep-invariant at j < k");
  c.require(enc_mask(EncoderKind::bidirectional, 4, 4, J).row_columns(3) !=
                enc_mask(EncoderKind::bidirectional, 4, 5, J).row_columns(3),
            "bidirectional grows with the timestep");
}

// ---- C2: mask equivalences ------------------------------------------------

void criterion_2() {
  Criterion c(2, "mask equivalences and nesting, all sizes <= 12, k <= 12");
  for (int J = 1; J <= 12; ++J) {
    const AttentionMask unidir = enc_mask(EncoderKind::unidirectional, 1, J, J);
    const AttentionMask bidir = enc_mask(EncoderKind::bidirectional, 1, J, J);
    c.require(enc_mask(EncoderKind::pbe, 1, J, J) == unidir,
              "pbe(k=1) != unidirectional at J=" + std::to_string(J));
    for (int k = 1; k <= 12; ++k) {
      const AttentionMask pbe = enc_mask(EncoderKind::pbe, k, J, J);
      c.require(unidir.subset_of(pbe),
                "unidirectional not within pbe at J=" + std::to_string(J) +
                    " k=" + std::to_string(k));
      c.require(pbe.subset_of(bidir),
                "pbe not within bidirectional at J=" + std::to_string(J) +
                    " k=" + std::to_string(k));
      if (k >= J)
        c.require(pbe == bidir, "pbe(k>=J) != bidirectional at J=" + std::to_string(J) +
                                    " k=" + std::to_string(k));
    }
  }
}

// ---- C3: information-flow soundness ---------------------------------------

void criterion_3() {
  Criterion c(3, "information flow respects the masks (200 trials per kind)");
  ModelConfig config;
  config.layers = 1;
  config.model_dim = 16;
  config.heads = 2;
  config.ffn_dim = 32;
  config.vocab_size = 16;
  ModelParams params;
  params.init(config, 12345);
  const int J = 9;
  Rng rng(999);

  for (const EncoderKind kind :
       {EncoderKind::unidirectional, EncoderKind::pbe, EncoderKind::bidirectional}) {
    EncoderMaskSpec spec;
    spec.kind = kind;
    spec.k = 3;
    spec.available = kind == EncoderKind::bidirectional ? 5 : J;
    const AttentionMask mask = encoder_mask(spec, J);

    int invariant_trials = 0, changed_trials = 0;
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<TokenId> src;
      for (int p = 0; p < J; ++p)
        src.push_back(static_cast<TokenId>(7 + rng.below(static_cast<std::uint64_t>(
                                                   config.vocab_size - 7))));
      int j = 1 + static_cast<int>(rng.below(J));
      while (!mask.allowed(j, j)) j = 1 + static_cast<int>(rng.below(J));
      std::vector<int> outside, inside;
      for (int p = 1; p <= J; ++p)
        (mask.allowed(j, p) ? inside : outside).push_back(p);
      const Matrix base = encode(params, config, src, mask);

      auto perturb_and_diff = [&](int p) {
        auto mutated = src;
        TokenId replacement = mutated[static_cast<std::size_t>(p - 1)];
        while (replacement == mutated[static_cast<std::size_t>(p - 1)])
          replacement = static_cast<TokenId>(
              7 + rng.below(static_cast<std::uint64_t>(config.vocab_size - 7)));
        mutated[static_cast<std::size_t>(p - 1)] = replacement;
        const Matrix after = encode(params, config, mutated, mask);
        double diff = 0.0;
        for (int col = 0; col < base.cols; ++col)
          diff = std::max(diff, std::abs(after.at(j - 1, col) - base.at(j - 1, col)));
        return diff;
      };

      if (!outside.empty()) {
        const int p = outside[rng.below(outside.size())];
        if (perturb_and_diff(p) <= 1e-6) ++invariant_trials;
      } else {
        ++invariant_trials;  // fully visible row: nothing to hide from it
      }
      const int p_in = inside[rng.below(inside.size())];
      if (perturb_and_diff(p_in) > 1e-9) ++changed_trials;
    }
    c.require(invariant_trials == 200,
              to_string(kind) + ": leakage detected in " +
                  std::to_string(200 - invariant_trials) + " trials");
    c.require(changed_trials == 200,
              to_string(kind) + ": " + std::to_string(200 - changed_trials) +
                  " in-set perturbations had no effect");
  }
}

// ---- C4: gradient check -----------------------------------------------------

void criterion_4() {
  Criterion c(4, "analytic gradients vs central differences, all parameters");
  ModelConfig config;
  config.layers = 1;
  config.model_dim = 8;
  config.heads = 2;
  config.ffn_dim = 16;
  config.vocab_size = 12;
  config.encoder_kind = EncoderKind::pbe;
  ModelParams params;
  params.init(config, 4242);
  TrainingBatch batch;
  batch.samples = {make_sample({0, 7, 8, 9, 2, 10, 11, 4}, {0, 8, 9, 2, 10, 11, 7, 4}),
                   make_sample({0, 9, 10, 4}, {0, 10, 9, 11, 4})};
  batch.k = 2;

  loss_and_gradients(params, config, batch);
  std::vector<Matrix> grads;
  params.visit([&grads](Param& p) { grads.push_back(p.grad); });

  const double eps = 1e-5;
  double worst = 0.0;
  long total = 0;
  std::size_t pi = 0;
  params.visit([&](Param& p) {
    const Matrix& g = grads[pi++];
    for (std::size_t i = 0; i < p.value.a.size(); ++i) {
      const double saved = p.value.a[i];
      p.value.a[i] = saved + eps;
      const double up = loss_and_gradients(params, config, batch);
      p.value.a[i] = saved - eps;
      const double down = loss_and_gradients(params, config, batch);
      p.value.a[i] = saved;
      const double fd = (up - down) / (2.0 * eps);
      const double rel = std::abs(fd - g.a[i]) / std::max(std::abs(fd) + std::abs(g.a[i]), 1e-6);
      worst = std::max(worst, rel);
      ++total;
    }
  });
  char buf[128];
  std::snprintf(buf, sizeof(buf), " [%ld params, worst rel err %.2e]", total, worst);
  c.note(buf);
  c.require(worst <= 1e-4, "worst relative error above 1e-4");
}

// ---- C5 + C6: the policy/latency grid ---------------------------------------

void for_each_length_vector(int slots, int max_len,
                            const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> lens(static_cast<std::size_t>(slots), 1);
  while (true) {
    fn(lens);
    int i = slots - 1;
    while (i >= 0 && lens[static_cast<std::size_t>(i)] == max_len) {
      lens[static_cast<std::size_t>(i)] = 1;
      --i;
    }
    if (i < 0) break;
    ++lens[static_cast<std::size_t>(i)];
  }
}

void criterion_5() {
  Criterion c(5, "trace delays == capped schedule, k <= 8, lengths <= 8, <= 3 sentences");
  long configs = 0;
  bool all_ok = true;
  std::string first;
  for (int sentences = 1; sentences <= 3 && all_ok; ++sentences) {
    for_each_length_vector(2 * sentences, 8, [&](const std::vector<int>& lens) {
      if (!all_ok) return;
      const std::vector<int> x(lens.begin(), lens.begin() + sentences);
      const std::vector<int> y(lens.begin() + sentences, lens.end());
      const Segmentation seg = Segmentation::from_lengths(x, y);
      for (int k = 1; k <= 8; ++k) {
        const WaitKPolicy policy{k, Rational(1, 1)};
        const ActionTrace trace = schedule_actions(policy, seg, x, y);
        const auto delays = trace.global_delays();
        ++configs;
        int i = 0;
        for (int n = 1; n <= sentences; ++n) {
          const int src_end =
              seg.start(Side::source, n) + x[static_cast<std::size_t>(n - 1)] - 1;
          for (int rel = 0; rel < y[static_cast<std::size_t>(n - 1)]; ++rel) {
            ++i;
            if (delays[static_cast<std::size_t>(i - 1)] !=
                cap_delay(stream_delay(policy, seg, i), src_end)) {
              all_ok = false;
              first = "mismatch at k=" + std::to_string(k) + " i=" + std::to_string(i);
              return;
            }
          }
        }
      }
    });
  }
  c.note(" [" + std::to_string(configs) + " schedules]");
  c.require(all_ok, first);
}

void criterion_6() {
  Criterion c(6, "latency oracles and sentence/stream consistency");

  // AL of the ideal wait-k policy with gamma = 1 is exactly k
  for (int k = 1; k <= 5; ++k) {
    for (int len = k; len <= 8; ++len) {
      DelayVector d;
      d.src_len = len;
      d.tgt_len = len;
      d.gamma = Rational(1, 1);
      for (int i = 1; i <= len; ++i) d.g.push_back(std::min(k + i - 1, len));
      c.require(al(d) == static_cast<double>(k),
                "AL(wait-" + std::to_string(k) + ", len " + std::to_string(len) + ") != k");
    }
  }

  // AP of the full-read policy is exactly 1
  for (int len = 1; len <= 8; ++len) {
    DelayVector d;
    d.src_len = len;
    d.tgt_len = len;
    d.gamma = Rational(1, 1);
    d.g.assign(static_cast<std::size_t>(len), len);
    c.require(ap(d) == 1.0, "AP(full read) != 1 at len " + std::to_string(len));
  }

  // hand-computed DAL fixtures
  {
    DelayVector d;
    d.gamma = Rational(1, 1);
    d.src_len = 3;
    d.tgt_len = 3;
    d.g = {1, 2, 3};
    c.require(dal(d) == 1.0, "DAL(1,2,3) != 1");
    d.g = {3, 3, 3};
    c.require(dal(d) == 3.0, "DAL(3,3,3) != 3");
    d.g = {1, 1, 3};
    c.require(dal(d) == 1.0, "DAL(1,1,3) != 1");
  }

  // sentence/stream consistency over the criterion-5 grid. AP and AL must be
  // identical. DAL is identical whenever the carried pacing clock has drained
  // at the boundary; where a flush burst leaves it ahead (k larger than a
  // sentence allows), the stream value must equal the carried recurrence,
  // re-derived here independently.
  long cells = 0, carry_bound_cells = 0;
  bool all_ok = true;
  std::string first;
  for (int sentences = 1; sentences <= 3 && all_ok; ++sentences) {
    for_each_length_vector(2 * sentences, 8, [&](const std::vector<int>& lens) {
      if (!all_ok) return;
      const std::vector<int> x(lens.begin(), lens.begin() + sentences);
      const std::vector<int> y(lens.begin() + sentences, lens.end());
      const Segmentation seg = Segmentation::from_lengths(x, y);
      const int src_total = std::accumulate(x.begin(), x.end(), 0);
      const int tgt_total = std::accumulate(y.begin(), y.end(), 0);
      for (int k = 1; k <= 8 && all_ok; ++k) {
        const ActionTrace trace = schedule_actions({k, Rational(1, 1)}, seg, x, y);
        const LatencyReport stream =
            stream_metrics(trace.global_delays(), seg, src_total, tgt_total, {});
        const auto parts = relative_delays(trace.global_delays(), seg, src_total, tgt_total);
        double carry = 0.0;
        for (int n = 0; n < sentences; ++n) {
          ++cells;
          const DelayVector& d = parts[static_cast<std::size_t>(n)];
          const auto& got = stream.per_sentence[static_cast<std::size_t>(n)];
          if (got.ap != ap(d) || got.al != al(d)) {
            all_ok = false;
            first = "AP/AL mismatch at k=" + std::to_string(k) + " n=" + std::to_string(n + 1);
            return;
          }
          // independent DAL recurrence with the rebased carry
          const double pace = 1.0 / d.gamma.value();
          double gp = std::max(static_cast<double>(d.g[0]), carry);
          double cost = gp;
          for (int i = 2; i <= d.tgt_len; ++i) {
            gp = std::max(static_cast<double>(d.g[static_cast<std::size_t>(i - 1)]), gp + pace);
            cost += gp - (i - 1) * pace;
          }
          const double expected_dal = cost / d.tgt_len;
          const bool carry_bound = carry > static_cast<double>(d.g[0]);
          carry_bound_cells += carry_bound;
          if (std::abs(got.dal - expected_dal) > 1e-12) {
            all_ok = false;
            first = "stream DAL != carried recurrence at k=" + std::to_string(k);
            return;
          }
          if (!carry_bound && got.dal != dal(d)) {
            all_ok = false;
            first = "drained-carry DAL != sentence DAL at k=" + std::to_string(k);
            return;
          }
          if (carry_bound && got.dal < dal(d)) {
            all_ok = false;
            first = "carried DAL below the sentence value at k=" + std::to_string(k);
            return;
          }
          carry = gp - d.src_len + pace;
        }
      }
    });
  }
  c.note(" [" + std::to_string(cells) + " sentence cells, carry binding in " +
         std::to_string(carry_bound_cells) + "]");
  c.require(all_ok, first);
}

// ---- C7: MWER optimality ----------------------------------------------------

long brute_force_mwer(const std::vector<std::string>& hyp,
                      const std::vector<std::vector<std::string>>& refs) {
  const int m = static_cast<int>(hyp.size());
  const int n = static_cast<int>(refs.size());
  if (n == 1) return levenshtein(hyp, refs[0]);
  std::vector<int> cuts(static_cast<std::size_t>(n - 1), 0);
  long best = -1;
  while (true) {
    bool monotone = true;
    for (std::size_t i = 1; i < cuts.size(); ++i)
      if (cuts[i] < cuts[i - 1]) monotone = false;
    if (monotone) {
      long cost = 0;
      int start = 0;
      for (int s = 0; s < n; ++s) {
        const int end = s < n - 1 ? cuts[static_cast<std::size_t>(s)] : m;
        cost += levenshtein({hyp.begin() + start, hyp.begin() + end},
                            refs[static_cast<std::size_t>(s)]);
        start = end;
      }
      if (best < 0 || cost < best) best = cost;
    }
    int i = static_cast<int>(cuts.size()) - 1;
    while (i >= 0 && cuts[static_cast<std::size_t>(i)] == m) {
      cuts[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
    ++cuts[static_cast<std::size_t>(i)];
  }
  return best;
}

void criterion_7() {
  Criterion c(7, "resegmentation cost equals brute force on 500 random instances");
  Rng rng(777);
  for (int trial = 0; trial < 500; ++trial) {
    auto word = [&rng]() { return std::string(1, static_cast<char>('a' + rng.below(3))); };
    std::vector<std::string> hyp;
    const int hyp_len = static_cast<int>(rng.range(0, 10));
    for (int i = 0; i < hyp_len; ++i) hyp.push_back(word());
    std::vector<std::vector<std::string>> refs;
    const int ref_count = static_cast<int>(rng.range(1, 3));
    for (int s = 0; s < ref_count; ++s) {
      std::vector<std::string> ref;
      const int len = static_cast<int>(rng.range(1, 5));
      for (int i = 0; i < len; ++i) ref.push_back(word());
      refs.push_back(std::move(ref));
    }
    const ResegmentationResult result = mwer_resegment(hyp, refs);
    const long oracle = brute_force_mwer(hyp, refs);
    c.require(result.total_cost == oracle,
              "trial " + std::to_string(trial) + ": " + std::to_string(result.total_cost) +
                  " != " + std::to_string(oracle));
    long realized = 0;
    for (int s = 1; s <= ref_count; ++s)
      realized += levenshtein(result.segment(hyp, s), refs[static_cast<std::size_t>(s - 1)]);
    c.require(realized == result.total_cost,
              "trial " + std::to_string(trial) + ": boundaries do not realize the cost");
  }
}

// ---- C8: corpus-construction fixture ----------------------------------------

void criterion_8() {
  Criterion c(8, "four-pair document with h=5 builds the eight marker sequences");
  DocumentCorpus corpus;
  corpus.documents.push_back({
      {tokenize("x11 x12"), tokenize("y11 y12")},
      {tokenize("x21 x22 x23"), tokenize("y21 y22")},
      {tokenize("x31 x32 x33"), tokenize("y31 y32 y33")},
      {tokenize("x41 x42"), tokenize("y41 y42")},
  });
  const auto samples = build_streaming_samples(corpus, 5);
  c.require(samples.size() == 4, "expected 4 samples");
  const std::vector<std::string> expected_src{
      "<DOC> x11 x12 <BRK>",
      "<DOC> x11 x12 <SEP> x21 x22 x23 <BRK>",
      "<DOC> x11 x12 <SEP> x21 x22 x23 <SEP> x31 x32 x33 <BRK>",
      "<CONT> x31 x32 x33 <SEP> x41 x42 <END>",
  };
  const std::vector<std::string> expected_tgt{
      "<DOC> y11 y12 <BRK>",
      "<DOC> y11 y12 <SEP> y21 y22 <BRK>",
      "<DOC> y11 y12 <SEP> y21 y22 <SEP> y31 y32 y33 <BRK>",
      "<CONT> y31 y32 y33 <SEP> y41 y42 <END>",
  };
  for (std::size_t i = 0; i < samples.size() && i < 4; ++i) {
    c.require(samples[i].source_line() == expected_src[i],
              "source sample " + std::to_string(i + 1) + " is '" + samples[i].source_line() + "'");
    c.require(samples[i].target_line() == expected_tgt[i],
              "target sample " + std::to_string(i + 1) + " is '" + samples[i].target_line() + "'");
  }
}

// ---- C9: incremental encoding -----------------------------------------------

void criterion_9() {
  Criterion c(9, "incremental encoding equals full re-encoding on 100 prefixes");
  ModelConfig config;
  config.layers = 2;
  config.model_dim = 16;
  config.heads = 2;
  config.ffn_dim = 32;
  config.vocab_size = 20;
  config.encoder_kind = EncoderKind::unidirectional;
  ModelParams params;
  params.init(config, 2024);
  Rng rng(31);
  EncoderMaskSpec spec;
  spec.kind = EncoderKind::unidirectional;

  for (int trial = 0; trial < 100; ++trial) {
    const int len = static_cast<int>(rng.range(1, 20));
    std::vector<TokenId> tokens;
    for (int i = 0; i < len; ++i)
      tokens.push_back(static_cast<TokenId>(rng.below(static_cast<std::uint64_t>(config.vocab_size))));
    IncrementalEncoder state = incremental_init(config);
    for (const TokenId t : tokens) incremental_push(params, config, state, t);
    const Matrix full = encode(params, config, tokens, encoder_mask(spec, len));
    c.require(max_abs_diff(state.encoded, full) <= 1e-6,
              "trial " + std::to_string(trial) + " diverged");
  }
}

// ---- shared toy-model experiment helpers -------------------------------------

Vocabulary word_vocab(int n) {
  Vocabulary v;
  for (int i = 0; i < n; ++i) v.add("w" + std::to_string(i));
  return v;
}

Checkpoint train_task_model(const DocumentCorpus& corpus, const Vocabulary& vocab,
                            EncoderKind kind, int h, int steps, int k_max, std::uint64_t seed) {
  Checkpoint ckpt;
  ckpt.config.layers = 1;
  ckpt.config.model_dim = 32;
  ckpt.config.heads = 2;
  ckpt.config.ffn_dim = 64;
  ckpt.config.vocab_size = static_cast<int>(vocab.size());
  ckpt.config.encoder_kind = kind;
  ckpt.config.history = h;
  ckpt.vocab = vocab;
  ckpt.params.init(ckpt.config, seed);

  const auto samples = samples_from_streaming(build_streaming_samples(corpus, h), vocab);
  TrainOptions opts;
  opts.steps = steps;
  opts.batch_size = 16;
  opts.k_min = 1;
  opts.k_max = k_max;
  opts.seed = seed;
  train_multi_k(ckpt.params, ckpt.config, samples, opts);
  return ckpt;
}

double task_accuracy(const Checkpoint& ckpt, const DocumentCorpus& held_out, int decode_k) {
  std::vector<std::vector<std::string>> hyp, ref;
  for (const auto& doc : held_out.documents) {
    TokenStream stream;
    std::vector<int> lens;
    for (const auto& pair : doc) {
      stream.tokens.insert(stream.tokens.end(), pair.source.begin(), pair.source.end());
      lens.push_back(static_cast<int>(pair.source.size()));
      ref.push_back(pair.target);
    }
    DecodeOptions opts;
    opts.policy = {decode_k, Rational(1, 1)};
    const DecodeResult r = greedy_stream_decode(ckpt.params, ckpt.config, ckpt.vocab, stream,
                                                oracle_boundaries(lens), opts);
    for (auto& s : r.output_sentences()) hyp.push_back(std::move(s));
  }
  return sequence_accuracy(hyp, ref);
}

// ---- C10: streaming history helps -------------------------------------------

void criterion_10() {
  Criterion c(10, "history-trained model beats the history-blind one (median of 5 seeds)");
  const SyntheticOptions gen{10, 3, 5, 4, 150};
  const SyntheticOptions held{10, 3, 5, 4, 8};
  const Vocabulary vocab = word_vocab(gen.vocab_real);

  std::vector<double> margins;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const DocumentCorpus train = agreement_task(gen, 1000 + seed);
    const DocumentCorpus eval = agreement_task(held, 2000 + seed);
    const Checkpoint with_history =
        train_task_model(train, vocab, EncoderKind::unidirectional, 24, 700, 8, seed);
    const Checkpoint without =
        train_task_model(train, vocab, EncoderKind::unidirectional, 0, 700, 8, seed);
    const double acc_h = task_accuracy(with_history, eval, 4);
    const double acc_0 = task_accuracy(without, eval, 4);
    margins.push_back(acc_h - acc_0);
    char buf[64];
    std::snprintf(buf, sizeof(buf), " s%llu:%+.2f(%.2f/%.2f)",
                  static_cast<unsigned long long>(seed), acc_h - acc_0, acc_h, acc_0);
    detail += buf;
  }
  std::sort(margins.begin(), margins.end());
  const double median = margins[2];
  c.note(" [margins" + detail + "]");
  c.require(median > 0.0, "median margin not positive");
}

// ---- C11: segmenter latency transparency -------------------------------------

void criterion_11() {
  Criterion c(11, "future window adds w initial reads, then 1:1 flow (20 streams)");
  Rng rng(4711);
  ModelConfig config;
  config.layers = 1;
  config.model_dim = 16;
  config.heads = 2;
  config.ffn_dim = 32;
  config.vocab_size = 17;
  config.encoder_kind = EncoderKind::unidirectional;
  ModelParams params;
  params.init(config, 88);
  const Vocabulary vocab = word_vocab(10);

  for (int trial = 0; trial < 20; ++trial) {
    const int sentences = static_cast<int>(rng.range(1, 3));
    TokenStream stream;
    std::vector<int> lens;
    for (int s = 0; s < sentences; ++s) {
      const int len = static_cast<int>(rng.range(2, 6));
      lens.push_back(len);
      for (int i = 0; i < len; ++i)
        stream.tokens.push_back("w" + std::to_string(rng.below(10)));
    }
    DecodeOptions opts;
    opts.policy = {static_cast<int>(rng.range(1, 4)), Rational(1, 1)};
    const DecodeResult decoded = greedy_stream_decode(params, config, vocab, stream,
                                                      oracle_boundaries(lens), opts);
    const auto base = decoded.trace.global_delays();
    const int S = stream.length();
    for (int w = 1; w <= 4; ++w) {
      const ActionTrace joint =
          shift_trace_for_window(decoded.trace, w, S, decoded.segmentation, S);
      for (int i = 0; i < std::min(w, S); ++i) {
        const auto& ev = joint.events[static_cast<std::size_t>(i)];
        c.require(ev.action == Action::read && ev.pos == i + 1,
                  "w=" + std::to_string(w) + ": initial reads malformed");
      }
      const auto shifted = joint.global_delays();
      for (std::size_t i = 0; i < base.size(); ++i)
        c.require(shifted[i] == std::min(base[i] + w, S),
                  "w=" + std::to_string(w) + ": delay " + std::to_string(i + 1) +
                      " not shifted by exactly w");
      // 1:1 flow after the fill: each further MT read consumes one stream token
      int mt_reads = 0, joint_reads = 0;
      for (const auto& ev : decoded.trace.events) mt_reads += ev.action == Action::read;
      for (const auto& ev : joint.events) joint_reads += ev.action == Action::read;
      c.require(joint_reads == std::min(mt_reads + w, S),
                "w=" + std::to_string(w) + ": read budget is not one per MT read");
    }
  }
}

// ---- C12: pbe vs unidirectional at high k ------------------------------------

void criterion_12() {
  Criterion c(12, "pbe matches or beats unidirectional at decode k=16 (median of 5 seeds)");
  const SyntheticOptions gen{10, 3, 6, 3, 150};
  const SyntheticOptions held{10, 3, 6, 3, 30};
  const Vocabulary vocab = word_vocab(gen.vocab_real);

  std::vector<double> margins;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const DocumentCorpus train = substitute_reorder_task(gen, 3000 + seed);
    const DocumentCorpus eval = substitute_reorder_task(held, 4000 + seed);
    const Checkpoint pbe = train_task_model(train, vocab, EncoderKind::pbe, 0, 2000, 16, seed);
    const Checkpoint unidir =
        train_task_model(train, vocab, EncoderKind::unidirectional, 0, 2000, 16, seed);
    const double acc_pbe = task_accuracy(pbe, eval, 16);
    const double acc_uni = task_accuracy(unidir, eval, 16);
    margins.push_back(acc_pbe - acc_uni);
    char buf[64];
    std::snprintf(buf, sizeof(buf), " s%llu:%+.2f(%.2f/%.2f)",
                  static_cast<unsigned long long>(seed), acc_pbe - acc_uni, acc_pbe, acc_uni);
    detail += buf;
  }
  std::sort(margins.begin(), margins.end());
  const double median = margins[2];
  c.note(" [margins" + detail + "]");
  c.require(median >= 0.0, "median margin is negative");
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_12();
  if (g_failures == 0) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%d criteria failed\n", g_failures);
  return 1;
}
