#include "waitk/resegment.hpp"

#include <algorithm>
#include <limits>

namespace waitk {

namespace {
constexpr long kInf = std::numeric_limits<long>::max() / 4;
}

long levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::size_t m = a.size(), n = b.size();
  std::vector<long> prev(n + 1), cur(n + 1);
  for (std::size_t j = 0; j <= n; ++j) prev[j] = static_cast<long>(j);
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0] = static_cast<long>(i);
    for (std::size_t j = 1; j <= n; ++j) {
      const long sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

std::vector<std::string> ResegmentationResult::segment(const std::vector<std::string>& hyp,
                                                       int n) const {
  const int count = static_cast<int>(boundaries.size());
  if (n < 1 || n > count) throw DataError("ResegmentationResult: segment index out of range");
  const int start = boundaries[static_cast<std::size_t>(n - 1)];
  const int end = n < count ? boundaries[static_cast<std::size_t>(n)] : static_cast<int>(hyp.size()) + 1;
  std::vector<std::string> out;
  for (int p = start; p < end; ++p) out.push_back(hyp[static_cast<std::size_t>(p - 1)]);
  return out;
}

ResegmentationResult mwer_resegment(const std::vector<std::string>& hyp,
                                    const std::vector<std::vector<std::string>>& refs) {
  if (refs.empty()) throw DataError("mwer_resegment: need at least one reference sentence");
  const int hyp_len = static_cast<int>(hyp.size());
  const int ref_count = static_cast<int>(refs.size());

  // cost[m] = best total edit distance with references 1..n matched against
  // the hypothesis prefix of length m; entry[n][m] = start of segment n on
  // that path (smaller starts win ties).
  std::vector<long> cost(static_cast<std::size_t>(hyp_len) + 1, kInf);
  cost[0] = 0;
  std::vector<std::vector<int>> entry(static_cast<std::size_t>(ref_count),
                                      std::vector<int>(static_cast<std::size_t>(hyp_len) + 1, 0));

  std::vector<long> dp_prev, dp_cur;
  std::vector<int> en_prev, en_cur;
  for (int n = 0; n < ref_count; ++n) {
    const auto& ref = refs[static_cast<std::size_t>(n)];
    const int ref_len = static_cast<int>(ref.size());
    dp_prev.assign(static_cast<std::size_t>(hyp_len) + 1, kInf);
    en_prev.assign(static_cast<std::size_t>(hyp_len) + 1, 0);

    // r = 0 row: hypothesis tokens consumed inside segment n before any
    // reference token count as deletions; entering at m is free.
    for (int m = 0; m <= hyp_len; ++m) {
      long best = cost[static_cast<std::size_t>(m)];
      int best_entry = m + 1;
      if (m > 0 && dp_prev[static_cast<std::size_t>(m - 1)] + 1 <= best) {
        const long cand = dp_prev[static_cast<std::size_t>(m - 1)] + 1;
        const int cand_entry = en_prev[static_cast<std::size_t>(m - 1)];
        if (cand < best || (cand == best && cand_entry < best_entry)) {
          best = cand;
          best_entry = cand_entry;
        }
      }
      dp_prev[static_cast<std::size_t>(m)] = best;
      en_prev[static_cast<std::size_t>(m)] = best_entry;
    }

    for (int r = 1; r <= ref_len; ++r) {
      dp_cur.assign(static_cast<std::size_t>(hyp_len) + 1, kInf);
      en_cur.assign(static_cast<std::size_t>(hyp_len) + 1, 0);
      dp_cur[0] = dp_prev[0] + 1;  // reference token inserted
      en_cur[0] = en_prev[0];
      for (int m = 1; m <= hyp_len; ++m) {
        const bool match = hyp[static_cast<std::size_t>(m - 1)] == ref[static_cast<std::size_t>(r - 1)];
        long best = dp_prev[static_cast<std::size_t>(m - 1)] + (match ? 0 : 1);
        int best_entry = en_prev[static_cast<std::size_t>(m - 1)];
        const long del = dp_cur[static_cast<std::size_t>(m - 1)] + 1;
        if (del < best || (del == best && en_cur[static_cast<std::size_t>(m - 1)] < best_entry)) {
          best = del;
          best_entry = en_cur[static_cast<std::size_t>(m - 1)];
        }
        const long ins = dp_prev[static_cast<std::size_t>(m)] + 1;
        if (ins < best || (ins == best && en_prev[static_cast<std::size_t>(m)] < best_entry)) {
          best = ins;
          best_entry = en_prev[static_cast<std::size_t>(m)];
        }
        dp_cur[static_cast<std::size_t>(m)] = best;
        en_cur[static_cast<std::size_t>(m)] = best_entry;
      }
      std::swap(dp_prev, dp_cur);
      std::swap(en_prev, en_cur);
    }

    cost = dp_prev;
    entry[static_cast<std::size_t>(n)] = en_prev;
  }

  ResegmentationResult result;
  result.total_cost = cost[static_cast<std::size_t>(hyp_len)];
  result.boundaries.assign(static_cast<std::size_t>(ref_count), 1);
  int m = hyp_len;
  for (int n = ref_count - 1; n >= 0; --n) {
    const int start = entry[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)];
    result.boundaries[static_cast<std::size_t>(n)] = start;
    m = start - 1;
  }
  return result;
}

}  // namespace waitk
