#include "waitk/synthetic.hpp"

#include <functional>

#include "waitk/rng.hpp"

namespace waitk {

namespace {

std::string word(int i) { return "w" + std::to_string(i); }

int word_index(const std::string& w) { return std::stoi(w.substr(1)); }

std::string shifted(const std::string& w, int vocab_real) {
  return word((word_index(w) + 1) % vocab_real);
}

std::vector<std::vector<std::string>> random_document(const SyntheticOptions& o, Rng& rng) {
  std::vector<std::vector<std::string>> doc;
  for (int s = 0; s < o.sentences_per_doc; ++s) {
    const int len = static_cast<int>(rng.range(o.min_len, o.max_len));
    std::vector<std::string> sent;
    for (int i = 0; i < len; ++i) sent.push_back(word(static_cast<int>(rng.below(o.vocab_real))));
    doc.push_back(std::move(sent));
  }
  return doc;
}

DocumentCorpus generate(const SyntheticOptions& o, std::uint64_t seed,
                        const std::function<std::vector<std::string>(
                            const std::vector<std::string>& src,
                            const std::vector<std::string>* prev_src)>& translate) {
  if (o.vocab_real < 2) throw ConfigError("synthetic: vocab_real must be >= 2");
  if (o.min_len < 1 || o.max_len < o.min_len) throw ConfigError("synthetic: bad length range");
  Rng rng(seed);
  DocumentCorpus corpus;
  for (int d = 0; d < o.documents; ++d) {
    const auto sentences = random_document(o, rng);
    std::vector<SentencePair> doc;
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      const std::vector<std::string>* prev = s > 0 ? &sentences[s - 1] : nullptr;
      doc.push_back({sentences[s], translate(sentences[s], prev)});
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace

DocumentCorpus copy_task(const SyntheticOptions& options, std::uint64_t seed) {
  return generate(options, seed,
                  [](const std::vector<std::string>& src, const std::vector<std::string>*) {
                    return src;
                  });
}

DocumentCorpus substitute_reorder_task(const SyntheticOptions& options, std::uint64_t seed) {
  const int v = options.vocab_real;
  return generate(options, seed,
                  [v](const std::vector<std::string>& src, const std::vector<std::string>*) {
                    std::vector<std::string> out = src;
                    for (std::size_t i = 0; i + 1 < out.size(); i += 2) std::swap(out[i], out[i + 1]);
                    for (auto& w : out) w = shifted(w, v);
                    return out;
                  });
}

DocumentCorpus agreement_task(const SyntheticOptions& options, std::uint64_t seed) {
  const int v = options.vocab_real;
  return generate(options, seed,
                  [v](const std::vector<std::string>& src, const std::vector<std::string>* prev) {
                    std::vector<std::string> out = src;
                    const std::string anchor = prev ? prev->back() : word(0);
                    out.front() = shifted(anchor, v);
                    return out;
                  });
}

double sequence_accuracy(const std::vector<std::vector<std::string>>& hyp_sentences,
                         const std::vector<std::vector<std::string>>& ref_sentences) {
  if (hyp_sentences.size() != ref_sentences.size())
    throw DataError("sequence_accuracy: sentence counts differ");
  if (hyp_sentences.empty()) throw DataError("sequence_accuracy: empty input");
  int exact = 0;
  for (std::size_t i = 0; i < hyp_sentences.size(); ++i)
    exact += hyp_sentences[i] == ref_sentences[i];
  return static_cast<double>(exact) / static_cast<double>(hyp_sentences.size());
}

}  // namespace waitk
