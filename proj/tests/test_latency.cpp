#include <cmath>

#include "doctest.h"
#include "waitk/latency.hpp"
#include "waitk/policy.hpp"

using namespace waitk;

namespace {

DelayVector dv(std::vector<int> g, int src_len, Rational gamma) {
  DelayVector d;
  d.tgt_len = static_cast<int>(g.size());
  d.g = std::move(g);
  d.src_len = src_len;
  d.gamma = gamma;
  return d;
}

}  // namespace

TEST_CASE("relative delays subtract the sentence offsets") {
  Segmentation seg;
  seg.a = {1, 4};
  seg.b = {1, 4};
  const auto parts = relative_delays({1, 2, 3, 4, 5, 6}, seg, 6, 6);
  REQUIRE(parts.size() == 2);
  CHECK(parts[0].g == std::vector<int>{1, 2, 3});
  CHECK(parts[1].g == std::vector<int>{1, 2, 3});

  Segmentation seg2;
  seg2.a = {1, 3};
  seg2.b = {1, 2};
  const auto parts2 = relative_delays({2, 4, 5}, seg2, 5, 3);
  CHECK(parts2[0].g == std::vector<int>{2});
  CHECK(parts2[1].g == std::vector<int>{2, 3});

  Segmentation single;
  single.a = {1};
  single.b = {1};
  const auto identity = relative_delays({2, 4, 5}, single, 5, 3);
  CHECK(identity[0].g == std::vector<int>{2, 4, 5});
}

TEST_CASE("average proportion sums delays over the area") {
  CHECK(ap(dv({3, 3, 3}, 3, Rational(1, 1))) == doctest::Approx(1.0));
  CHECK(ap(dv({1, 2, 3}, 3, Rational(1, 1))) == doctest::Approx(6.0 / 9.0));
  CHECK(ap(dv({2, 3}, 3, Rational(2, 3))) == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("average lagging uses the first full-read position") {
  CHECK(al(dv({1, 2, 3, 4, 5}, 5, Rational(1, 1))) == doctest::Approx(1.0));
  CHECK(al(dv({3, 4, 5, 5, 5}, 5, Rational(1, 1))) == doctest::Approx(3.0));
  CHECK(al(dv({5, 5, 5, 5, 5}, 5, Rational(1, 1))) == doctest::Approx(5.0));
}

TEST_CASE("average lagging falls back to the target length when no delay reaches the source") {
  // an under-generating schedule: two tokens written against five source tokens
  const DelayVector d = dv({1, 2}, 5, Rational(2, 5));
  CHECK(al(d) == doctest::Approx((1.0 + (2.0 - 2.5)) / 2.0));
}

TEST_CASE("differentiable average lagging fixtures") {
  CHECK(dal(dv({1, 2, 3}, 3, Rational(1, 1))) == doctest::Approx(1.0));
  CHECK(dal(dv({3, 3, 3}, 3, Rational(1, 1))) == doctest::Approx(3.0));
  CHECK(dal(dv({1, 1, 3}, 3, Rational(1, 1))) == doctest::Approx(1.0));
}

TEST_CASE("dal pacing clock moves at least 1/gamma per step") {
  const DelayVector d = dv({2, 2, 2, 9, 9}, 9, Rational(1, 2));
  // reconstruct g' and check the slope bound
  const double pace = 1.0 / d.gamma.value();
  double gprime = d.g[0];
  for (int i = 1; i < d.tgt_len; ++i) {
    const double next = std::max(static_cast<double>(d.g[static_cast<std::size_t>(i)]),
                                 gprime + pace);
    CHECK(next - gprime >= pace - 1e-12);
    gprime = next;
  }
}

TEST_CASE("dal scale multiplies the pacing term") {
  // g=(3,3,3), gamma=1: scale 1 gives g'=(3,4,5); scale 0.5 gives (3,3.5,4)
  const DelayVector d = dv({3, 3, 3}, 3, Rational(1, 1));
  CHECK(dal(d, 1.0) == doctest::Approx(3.0));
  CHECK(dal(d, 0.5) == doctest::Approx((3.0 + 3.5 - 1.0 + 4.0 - 2.0) / 3.0));
}

TEST_CASE("stream metrics of a single sentence equal the sentence-level metrics") {
  Segmentation seg;
  seg.a = {1};
  seg.b = {1};
  const std::vector<int> G{3, 3, 3};
  const auto report = stream_metrics(G, seg, 3, 3, {});
  const DelayVector d = dv(G, 3, Rational(1, 1));
  CHECK(report.per_sentence.size() == 1);
  CHECK(report.aggregate.ap == doctest::Approx(ap(d)));
  CHECK(report.aggregate.al == doctest::Approx(al(d)));
  CHECK(report.aggregate.dal == doctest::Approx(dal(d)));
}

TEST_CASE("stream metrics match sentence-level metrics on a restarting trace") {
  // wait-1 over two equal sentences: the pacing clock drains exactly at each
  // boundary, so per-sentence values equal isolated sentence-level values
  const std::vector<int> x{3, 3}, y{3, 3};
  const Segmentation seg = Segmentation::from_lengths(x, y);
  const ActionTrace trace = schedule_actions({1, Rational(1, 1)}, seg, x, y);
  const auto report = stream_metrics(trace.global_delays(), seg, 6, 6, {});
  REQUIRE(report.per_sentence.size() == 2);
  for (const auto& s : report.per_sentence) {
    CHECK(s.al == doctest::Approx(1.0));
    CHECK(s.dal == doctest::Approx(1.0));
  }
}

TEST_CASE("stalled stream: the dal carry keeps the pacing clock running") {
  // sentence 2's first token is written only after the reader ran far ahead
  Segmentation seg;
  seg.a = {1, 4};
  seg.b = {1, 4};
  // G frozen at 12 for sentence 2 (the system lags 9 tokens behind its start)
  const std::vector<int> G{3, 3, 3, 12, 12, 12};
  const auto report = stream_metrics(G, seg, 12, 6, {});
  // g_2 = (9, 9, 9) on a src_len of 9; relative delay alone captures the lag
  CHECK(report.per_sentence[1].al > 5.0);
  CHECK(report.per_sentence[1].dal >= report.per_sentence[1].al);
}

TEST_CASE("dal carry binds after a flush burst and rebases exactly") {
  // k=4 over a length-3 sentence is a full-read burst; the pacing clock enters
  // sentence 2 three tokens high: g'_2(1) = max(g_2(1), g'_1(3) - |x_1| + 1/gamma_1)
  const std::vector<int> x{3, 1}, y{3, 1};
  const Segmentation seg = Segmentation::from_lengths(x, y);
  const ActionTrace trace = schedule_actions({4, Rational(1, 1)}, seg, x, y);
  const auto report = stream_metrics(trace.global_delays(), seg, 4, 4, {});
  // sentence-level DAL of sentence 2 would be 1; the carried clock makes it 3
  CHECK(report.per_sentence[1].dal == doctest::Approx(3.0));
  const DelayVector isolated = dv({1}, 1, Rational(1, 1));
  CHECK(dal(isolated) == doctest::Approx(1.0));
}

TEST_CASE("aggregation modes: unweighted mean and target-weighted mean") {
  Segmentation seg;
  seg.a = {1, 3};
  seg.b = {1, 2};
  const std::vector<int> G{2, 3, 4, 4};
  LatencyConfig cfg;
  const auto mean_report = stream_metrics(G, seg, 4, 4, {}, cfg);
  cfg.aggregation = Aggregation::target_weighted;
  const auto weighted = stream_metrics(G, seg, 4, 4, {}, cfg);
  const auto& s = mean_report.per_sentence;
  CHECK(mean_report.aggregate.ap == doctest::Approx((s[0].ap + s[1].ap) / 2.0));
  CHECK(weighted.aggregate.ap == doctest::Approx((1.0 * s[0].ap + 3.0 * s[1].ap) / 4.0));
}

TEST_CASE("stream metrics reject empty input and produce finite values") {
  Segmentation seg;
  seg.a = {1};
  seg.b = {1};
  CHECK_THROWS_AS(stream_metrics({}, seg, 1, 0, {}), DataError);
  const auto report = stream_metrics({1}, seg, 1, 1, {});
  CHECK(std::isfinite(report.aggregate.ap));
  CHECK(std::isfinite(report.aggregate.al));
  CHECK(std::isfinite(report.aggregate.dal));
}

TEST_CASE("latency report serializes to CSV with one row per sentence") {
  Segmentation seg;
  seg.a = {1, 3};
  seg.b = {1, 3};
  const auto report = stream_metrics({2, 2, 4, 4}, seg, 4, 4, {});
  const std::string csv = report.to_csv();
  CHECK(csv.find("sentence,AP,AL,DAL\n") == 0);
  CHECK(csv.find("aggregate,") != std::string::npos);
}

TEST_CASE("DAL dominates AL on wait-k delay vectors with the oracle rate") {
  for (int k = 1; k <= 4; ++k)
    for (int src = 1; src <= 6; ++src)
      for (int tgt = 1; tgt <= 6; ++tgt) {
        DelayVector d;
        d.src_len = src;
        d.tgt_len = tgt;
        d.gamma = catch_up_factor(src, tgt);
        for (int i = 1; i <= tgt; ++i)
          d.g.push_back(std::min(local_delay({k, Rational(1, 1)}, i), src));
        CHECK(dal(d) >= al(d) - 1e-12);
        CHECK(al(d) >= 0.0);
      }
}
