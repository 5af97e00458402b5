#pragma once

#include <cstdint>

#include "waitk/corpus.hpp"

namespace waitk {

/// Seeded generators for the desk-scale tasks. Surfaces are w0..w{V-1};
/// sentence lengths are uniform in [min_len, max_len].
struct SyntheticOptions {
  int vocab_real = 20;
  int min_len = 3;
  int max_len = 8;
  int sentences_per_doc = 4;
  int documents = 40;
};

/// Target equals source.
DocumentCorpus copy_task(const SyntheticOptions& options, std::uint64_t seed);

/// Adjacent source tokens swap pairwise, then every token shifts to the next
/// vocabulary entry. Translating position 1 correctly needs one token of
/// lookahead, so larger k (or a forward-looking encoder) helps.
DocumentCorpus substitute_reorder_task(const SyntheticOptions& options, std::uint64_t seed);

/// Copy task, except the first target token of every sentence is the shifted
/// image of the previous sentence's last source token (w0 for a document's
/// first sentence). Unsolvable exactly without cross-sentence history.
DocumentCorpus agreement_task(const SyntheticOptions& options, std::uint64_t seed);

/// Exact-match fraction between decoded and reference sentences.
double sequence_accuracy(const std::vector<std::vector<std::string>>& hyp_sentences,
                         const std::vector<std::vector<std::string>>& ref_sentences);

}  // namespace waitk
