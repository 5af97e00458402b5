#include "waitk/corpus.hpp"

#include <sstream>

#include "waitk/rng.hpp"

namespace waitk {

void DocumentCorpus::validate() const {
  if (documents.empty()) throw DataError("DocumentCorpus: no documents");
  for (const auto& doc : documents) {
    if (doc.empty()) throw DataError("DocumentCorpus: empty document");
    for (const auto& pair : doc)
      if (pair.source.empty() || pair.target.empty())
        throw DataError("DocumentCorpus: empty sentence");
  }
}

int admit_history_pairs(const std::vector<int>& source_lens_before, int h) {
  if (h < 0) throw ConfigError("history threshold must be >= 0");
  int admitted = 0, used = 0;
  for (auto it = source_lens_before.rbegin(); it != source_lens_before.rend(); ++it) {
    if (used + *it > h) break;  // contiguity: stop at the first pair that does not fit
    used += *it;
    ++admitted;
  }
  return admitted;
}

std::vector<StreamingSample> build_streaming_samples(const DocumentCorpus& corpus, int h) {
  if (h < 0) throw ConfigError("build_streaming_samples: h must be >= 0");
  corpus.validate();

  std::vector<StreamingSample> samples;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const auto& doc = corpus.documents[d];
    std::vector<int> src_lens;
    for (const auto& pair : doc) src_lens.push_back(static_cast<int>(pair.source.size()));

    for (std::size_t cur = 0; cur < doc.size(); ++cur) {
      const std::vector<int> before(src_lens.begin(), src_lens.begin() + static_cast<long>(cur));
      const int admitted = admit_history_pairs(before, h);
      const std::size_t first = cur - static_cast<std::size_t>(admitted);

      StreamingSample sample;
      sample.document = static_cast<int>(d) + 1;
      sample.pair_index = static_cast<int>(cur) + 1;
      sample.history_sentences = admitted;
      for (std::size_t p = first; p < cur; ++p)
        sample.history_source_tokens += src_lens[p];

      // <CONT> marks a window that starts mid-document with history attached;
      // a history-free sample reads like a fresh document start
      const char* head = (admitted > 0 && first > 0) ? "<CONT>" : "<DOC>";
      const char* tail = cur + 1 == doc.size() ? "<END>" : "<BRK>";

      auto emit = [&](std::vector<std::string>& out, auto member) {
        out.push_back(head);
        for (std::size_t p = first; p <= cur; ++p) {
          if (p > first) out.push_back("<SEP>");
          const auto& sent = doc[p].*member;
          out.insert(out.end(), sent.begin(), sent.end());
        }
        out.push_back(tail);
      };
      emit(sample.source, &SentencePair::source);
      emit(sample.target, &SentencePair::target);
      samples.push_back(std::move(sample));
    }
  }
  return samples;
}

std::vector<StreamingSample> upsample_mix(const std::vector<StreamingSample>& streaming,
                                          const std::vector<StreamingSample>& sentence_level,
                                          int ratio, std::uint64_t seed) {
  if (ratio < 1) throw ConfigError("upsample_mix: ratio must be >= 1");
  std::vector<StreamingSample> out = sentence_level;
  if (!streaming.empty()) {
    const long stream_n = static_cast<long>(streaming.size());
    const long sent_n = static_cast<long>(sentence_level.size());
    // smallest factor with factor * |streaming| * ratio >= |sentence_level|
    long factor = (sent_n + stream_n * ratio - 1) / (stream_n * ratio);
    factor = std::max(factor, 1L);
    for (long rep = 0; rep < factor; ++rep)
      out.insert(out.end(), streaming.begin(), streaming.end());
  }
  Rng rng(seed);
  rng.shuffle(out);
  return out;
}

namespace {

SentencePair make_pair(const std::string& src_line, const std::string& tgt_line) {
  SentencePair pair{tokenize(src_line), tokenize(tgt_line)};
  if (pair.source.empty() || pair.target.empty())
    throw DataError("corpus line with an empty side");
  return pair;
}

}  // namespace

DocumentCorpus read_document_corpus(const std::string& src_path, const std::string& tgt_path,
                                    const std::string& doc_index_path) {
  const auto src = read_lines(src_path);
  const auto tgt = read_lines(tgt_path);
  if (src.size() != tgt.size()) throw DataError("corpus sides have different line counts");

  DocumentCorpus corpus;
  for (const auto& line : read_lines(doc_index_path)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    long first = 0, last = 0;
    if (!(ss >> first >> last) || first < 1 || last < first ||
        last > static_cast<long>(src.size()))
      throw DataError("bad document index line: " + line);
    std::vector<SentencePair> doc;
    for (long i = first; i <= last; ++i)
      doc.push_back(make_pair(src[static_cast<std::size_t>(i - 1)],
                              tgt[static_cast<std::size_t>(i - 1)]));
    corpus.documents.push_back(std::move(doc));
  }
  corpus.validate();
  return corpus;
}

DocumentCorpus read_sentence_corpus(const std::string& src_path, const std::string& tgt_path) {
  const auto src = read_lines(src_path);
  const auto tgt = read_lines(tgt_path);
  if (src.size() != tgt.size()) throw DataError("corpus sides have different line counts");
  DocumentCorpus corpus;
  for (std::size_t i = 0; i < src.size(); ++i)
    corpus.documents.push_back({make_pair(src[i], tgt[i])});
  corpus.validate();
  return corpus;
}

}  // namespace waitk
