#include "waitk/latency.hpp"

#include <cmath>
#include <sstream>

namespace waitk {

void DelayVector::validate() const {
  if (src_len < 1 || tgt_len < 1) throw DataError("DelayVector: lengths must be >= 1");
  if (static_cast<int>(g.size()) != tgt_len) throw DataError("DelayVector: |g| != tgt_len");
  if (!gamma.positive()) throw DataError("DelayVector: gamma must be positive");
  // In stream mode a relative delay may leave [1, src_len]: a lagging system
  // reads past the oracle boundary, a resegmented hypothesis can run ahead of
  // it. Only monotonicity is structural.
  for (std::size_t i = 1; i < g.size(); ++i)
    if (g[i] < g[i - 1]) throw DataError("DelayVector: delays must be non-decreasing");
}

std::vector<DelayVector> relative_delays(const std::vector<int>& global_delays,
                                         const Segmentation& seg, int src_total,
                                         int tgt_total) {
  seg.validate();
  if (static_cast<int>(global_delays.size()) != tgt_total)
    throw DataError("relative_delays: |G| != target total");
  if (seg.a.back() > src_total || seg.b.back() > tgt_total)
    throw DataError("relative_delays: segmentation exceeds stream lengths");

  std::vector<DelayVector> out;
  const int sentences = seg.sentence_count();
  for (int n = 1; n <= sentences; ++n) {
    DelayVector d;
    d.src_len = seg.source_len(n, src_total);
    d.tgt_len = seg.target_len(n, tgt_total);
    d.gamma = catch_up_factor(d.src_len, d.tgt_len);
    const int a_n = seg.start(Side::source, n);
    const int b_n = seg.start(Side::target, n);
    for (int i = 1; i <= d.tgt_len; ++i)
      d.g.push_back(global_delays[static_cast<std::size_t>(i + b_n - 2)] - a_n + 1);
    out.push_back(std::move(d));
  }
  return out;
}

double ap(const DelayVector& d) {
  d.validate();
  double sum = 0.0;
  for (const int gi : d.g) sum += gi;
  return sum / (static_cast<double>(d.src_len) * static_cast<double>(d.tgt_len));
}

double al(const DelayVector& d) {
  d.validate();
  int tau = d.tgt_len;
  for (int i = 1; i <= d.tgt_len; ++i) {
    if (d.g[static_cast<std::size_t>(i - 1)] >= d.src_len) {
      tau = i;
      break;
    }
  }
  const double inv_gamma = 1.0 / d.gamma.value();
  double sum = 0.0;
  for (int i = 1; i <= tau; ++i)
    sum += d.g[static_cast<std::size_t>(i - 1)] - (i - 1) * inv_gamma;
  return sum / tau;
}

namespace {

// Runs the DAL recurrence, returning the per-sentence score and the final g'
// value (the pacing clock) for the cross-sentence carry. carry_in < g(1)
// leaves the sentence-level recurrence untouched.
struct DalResult {
  double score;
  double final_gprime;
};

DalResult dal_with_carry(const DelayVector& d, double scale, double carry_in) {
  const double pace = scale / d.gamma.value();
  const double inv_gamma = 1.0 / d.gamma.value();
  double gprime = std::max(static_cast<double>(d.g.front()), carry_in);
  double sum = gprime;  // C_1 = g'(1) - 0
  for (int i = 2; i <= d.tgt_len; ++i) {
    gprime = std::max(static_cast<double>(d.g[static_cast<std::size_t>(i - 1)]), gprime + pace);
    sum += gprime - (i - 1) * inv_gamma;
  }
  return {sum / d.tgt_len, gprime};
}

}  // namespace

double dal(const DelayVector& d, double scale) {
  d.validate();
  return dal_with_carry(d, scale, 0.0).score;
}

LatencyReport stream_metrics(const std::vector<int>& global_delays, const Segmentation& seg,
                             int src_total, int tgt_total,
                             const std::vector<Rational>& per_sentence_gamma,
                             const LatencyConfig& config) {
  if (global_delays.empty()) throw DataError("stream_metrics: empty stream");
  auto sentences = relative_delays(global_delays, seg, src_total, tgt_total);
  if (!per_sentence_gamma.empty()) {
    if (per_sentence_gamma.size() != sentences.size())
      throw DataError("stream_metrics: gamma list size mismatch");
    for (std::size_t n = 0; n < sentences.size(); ++n) sentences[n].gamma = per_sentence_gamma[n];
  }

  LatencyReport report;
  report.config = config;
  report.stream_mode = true;

  double carry = 0.0;
  double ap_sum = 0.0, al_sum = 0.0, dal_sum = 0.0, weight_sum = 0.0;
  for (const auto& d : sentences) {
    d.validate();
    SentenceLatency s;
    s.ap = ap(d);
    s.al = al(d);
    const DalResult r = dal_with_carry(d, config.dal_scale, carry);
    s.dal = r.score;
    // rebase the pacing clock into the next sentence's frame
    carry = r.final_gprime - d.src_len + config.dal_scale / d.gamma.value();
    report.per_sentence.push_back(s);

    const double w = config.aggregation == Aggregation::target_weighted ? d.tgt_len : 1.0;
    ap_sum += w * s.ap;
    al_sum += w * s.al;
    dal_sum += w * s.dal;
    weight_sum += w;
  }
  report.aggregate = {ap_sum / weight_sum, al_sum / weight_sum, dal_sum / weight_sum};
  return report;
}

LatencyReport sentence_metrics(const DelayVector& d, const LatencyConfig& config) {
  LatencyReport report;
  report.config = config;
  report.stream_mode = false;
  SentenceLatency s{ap(d), al(d), dal(d, config.dal_scale)};
  report.per_sentence.push_back(s);
  report.aggregate = s;
  return report;
}

std::string LatencyReport::to_csv() const {
  std::ostringstream out;
  out << "sentence,AP,AL,DAL\n";
  out.precision(10);
  for (std::size_t n = 0; n < per_sentence.size(); ++n) {
    const auto& s = per_sentence[n];
    out << (n + 1) << ',' << s.ap << ',' << s.al << ',' << s.dal << '\n';
  }
  out << "aggregate," << aggregate.ap << ',' << aggregate.al << ',' << aggregate.dal << '\n';
  return out.str();
}

}  // namespace waitk
