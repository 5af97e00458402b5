#include "waitk/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "json.hpp"

namespace waitk {

namespace {

void count_ngrams(const std::vector<std::string>& tokens, int n,
                  std::unordered_map<std::string, long>& counts) {
  const int len = static_cast<int>(tokens.size());
  for (int i = 0; i + n <= len; ++i) {
    std::string key;
    for (int j = 0; j < n; ++j) {
      if (j) key += '\x1f';
      key += tokens[static_cast<std::size_t>(i + j)];
    }
    ++counts[key];
  }
}

}  // namespace

BleuScore corpus_bleu(const std::vector<std::vector<std::string>>& hyps,
                      const std::vector<std::vector<std::string>>& refs,
                      const BleuOptions& options) {
  if (hyps.size() != refs.size())
    throw DataError("corpus_bleu: hypothesis/reference sentence counts differ");
  if (hyps.empty()) throw DataError("corpus_bleu: empty corpus");
  if (options.max_n < 1 || options.max_n > 4) throw ConfigError("corpus_bleu: max_n must be 1..4");

  BleuScore out;
  std::array<long, 4> matched{};
  std::array<long, 4> total{};

  for (std::size_t s = 0; s < hyps.size(); ++s) {
    out.hyp_len += static_cast<long>(hyps[s].size());
    out.ref_len += static_cast<long>(refs[s].size());
    for (int n = 1; n <= options.max_n; ++n) {
      std::unordered_map<std::string, long> hyp_counts, ref_counts;
      count_ngrams(hyps[s], n, hyp_counts);
      count_ngrams(refs[s], n, ref_counts);
      for (const auto& [key, count] : hyp_counts) {
        total[static_cast<std::size_t>(n - 1)] += count;
        const auto it = ref_counts.find(key);
        if (it != ref_counts.end())
          matched[static_cast<std::size_t>(n - 1)] += std::min(count, it->second);
      }
    }
  }

  // orders with an empty candidate pool (every sentence shorter than n) carry
  // no evidence and drop out of the geometric mean
  double log_sum = 0.0;
  int orders = 0;
  bool zero = false;
  for (int n = 1; n <= options.max_n; ++n) {
    long m = matched[static_cast<std::size_t>(n - 1)];
    long t = total[static_cast<std::size_t>(n - 1)];
    if (options.smooth_add_one && n > 1 && t > 0) {
      m += 1;
      t += 1;
    }
    const double p = t > 0 ? static_cast<double>(m) / static_cast<double>(t) : 0.0;
    out.precisions[static_cast<std::size_t>(n - 1)] = p;
    if (t == 0) continue;
    ++orders;
    if (p <= 0.0)
      zero = true;
    else
      log_sum += std::log(p);
  }
  if (orders == 0) zero = true;

  out.brevity_penalty =
      out.hyp_len < out.ref_len && out.hyp_len > 0
          ? std::exp(1.0 - static_cast<double>(out.ref_len) / static_cast<double>(out.hyp_len))
          : (out.hyp_len == 0 ? 0.0 : 1.0);
  out.score = zero ? 0.0 : out.brevity_penalty * std::exp(log_sum / orders);
  return out;
}

std::string BleuScore::to_json() const {
  nlohmann::json j;
  j["bleu"] = score * 100.0;
  j["score"] = score;
  j["precisions"] = precisions;
  j["brevity_penalty"] = brevity_penalty;
  j["hyp_len"] = hyp_len;
  j["ref_len"] = ref_len;
  return j.dump(2);
}

}  // namespace waitk
