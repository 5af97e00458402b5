#pragma once

#include <string>
#include <vector>

#include "waitk/text.hpp"

namespace waitk {

/// One aligned sentence pair, whitespace-tokenized surfaces.
struct SentencePair {
  std::vector<std::string> source;
  std::vector<std::string> target;
};

/// Document-ordered aligned corpus.
struct DocumentCorpus {
  std::vector<std::vector<SentencePair>> documents;

  void validate() const;
};

/// A training sample in surface form: the current sentence pair prefixed with
/// as much whole-sentence history as the source-side token budget h admits,
/// wrapped in marker tokens.
struct StreamingSample {
  std::vector<std::string> source;
  std::vector<std::string> target;
  int history_source_tokens = 0;  // real tokens only, markers excluded
  int history_sentences = 0;
  int document = 0;    // 1-based document index
  int pair_index = 0;  // 1-based pair index within the document

  std::string source_line() const { return join_tokens(source); }
  std::string target_line() const { return join_tokens(target); }
};

/// Builds one sample per sentence pair. History sentences are added nearest
/// first and kept contiguous; a pair whose source side would push the history
/// past h tokens is dropped together with everything before it. Samples whose
/// history reaches the document start open with <DOC>, others with <CONT>;
/// sentences are joined with <SEP>; the sample closes with <BRK>, or <END>
/// for the document's final pair. Markers never count toward h.
std::vector<StreamingSample> build_streaming_samples(const DocumentCorpus& corpus, int h);

/// Duplicates the streaming samples until streaming:sentence_level reaches at
/// least 1:ratio, then shuffles deterministically under the seed. Inputs that
/// already satisfy the ratio come back unchanged (in shuffled order).
std::vector<StreamingSample> upsample_mix(const std::vector<StreamingSample>& streaming,
                                          const std::vector<StreamingSample>& sentence_level,
                                          int ratio, std::uint64_t seed);

/// How many trailing whole pairs of `history` fit within h source tokens.
/// Shared between corpus construction and the decode-time history window.
int admit_history_pairs(const std::vector<int>& source_lens_before, int h);

// Document-boundary index file: one "first_line<TAB>last_line" pair per
// document, 1-based inclusive, referring to the aligned sentence files.
DocumentCorpus read_document_corpus(const std::string& src_path, const std::string& tgt_path,
                                    const std::string& doc_index_path);

/// Every line is its own single-pair document (no document structure known).
DocumentCorpus read_sentence_corpus(const std::string& src_path, const std::string& tgt_path);

}  // namespace waitk
