#pragma once

#include <array>
#include <string>
#include <vector>

#include "waitk/text.hpp"

namespace waitk {

/// Corpus BLEU decomposition. score is in [0, 1]; the CLI multiplies by 100.
struct BleuScore {
  double score = 0.0;
  std::array<double, 4> precisions{};
  double brevity_penalty = 1.0;
  long hyp_len = 0;
  long ref_len = 0;

  std::string to_json() const;
};

struct BleuOptions {
  int max_n = 4;
  bool smooth_add_one = false;  // add-one on clipped counts, for tiny corpora
};

/// Corpus BLEU: clipped n-gram counts pooled over the corpus, geometric mean
/// of the n-gram precisions, brevity penalty exp(1 - ref_len/hyp_len) when
/// the hypothesis is shorter. Unsmoothed, any zero precision zeroes the score.
BleuScore corpus_bleu(const std::vector<std::vector<std::string>>& hyps,
                      const std::vector<std::vector<std::string>>& refs,
                      const BleuOptions& options = {});

}  // namespace waitk
