#pragma once

#include <string>
#include <vector>

#include "waitk/text.hpp"

namespace waitk {

/// Hypothesis split against reference sentences: boundaries[n-1] is the
/// 1-based start of the hypothesis segment aligned to reference sentence n
/// (segments are contiguous and may be empty). total_cost is the summed
/// token-level Levenshtein distance under this split.
struct ResegmentationResult {
  std::vector<int> boundaries;
  long total_cost = 0;

  /// Segment n as a token slice of the hypothesis (n is 1-based).
  std::vector<std::string> segment(const std::vector<std::string>& hyp, int n) const;
};

/// Token-level Levenshtein distance with unit insert/delete/substitute costs.
long levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Splits an unsegmented hypothesis into |refs| contiguous segments minimizing
/// the total edit distance against the reference sentences, by dynamic
/// programming over (hypothesis prefix, reference sentence, reference
/// position). Ties resolve to the earliest boundary vector.
ResegmentationResult mwer_resegment(const std::vector<std::string>& hyp,
                                    const std::vector<std::vector<std::string>>& refs);

}  // namespace waitk
