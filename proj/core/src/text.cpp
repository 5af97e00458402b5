#include "waitk/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace waitk {

Vocabulary::Vocabulary() {
  for (const char* s : {"<DOC>", "<CONT>", "<SEP>", "<BRK>", "<END>", "<UNK>", "<PAD>"}) add(s);
}

TokenId Vocabulary::add(const std::string& surface) {
  if (surface.empty()) throw DataError("Vocabulary: empty surface");
  if (auto it = index_.find(surface); it != index_.end()) return it->second;
  const TokenId id = static_cast<TokenId>(entries_.size());
  entries_.push_back(surface);
  index_.emplace(surface, id);
  return id;
}

TokenId Vocabulary::lookup(const std::string& surface) const {
  const auto it = index_.find(surface);
  return it == index_.end() ? markers::kUnk : it->second;
}

bool Vocabulary::contains(const std::string& surface) const {
  return index_.count(surface) > 0;
}

const std::string& Vocabulary::surface(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= entries_.size())
    throw DataError("Vocabulary: id out of range");
  return entries_[static_cast<std::size_t>(id)];
}

Vocabulary Vocabulary::from_lines(const std::vector<std::string>& lines) {
  Vocabulary v;
  for (const auto& line : lines)
    for (const auto& tok : tokenize(line)) v.add(tok);
  return v;
}

std::vector<TokenId> TokenStream::ids(const Vocabulary& vocab) const {
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(vocab.lookup(t));
  return out;
}

void Segmentation::validate() const {
  if (a.size() != b.size()) throw DataError("Segmentation: |a| != |b|");
  if (a.empty()) throw DataError("Segmentation: empty");
  if (a.front() != 1 || b.front() != 1) throw DataError("Segmentation: first sentence must start at 1");
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (a[i] <= a[i - 1] || b[i] <= b[i - 1])
      throw DataError("Segmentation: starts must be strictly increasing");
  }
}

int Segmentation::source_len(int n, int src_total) const {
  const int s = start(Side::source, n);
  const int e = n < sentence_count() ? start(Side::source, n + 1) - 1 : src_total;
  return e - s + 1;
}

int Segmentation::target_len(int n, int tgt_total) const {
  const int s = start(Side::target, n);
  const int e = n < sentence_count() ? start(Side::target, n + 1) - 1 : tgt_total;
  return e - s + 1;
}

Segmentation Segmentation::from_lengths(const std::vector<int>& src_lens,
                                        const std::vector<int>& tgt_lens) {
  if (src_lens.size() != tgt_lens.size() || src_lens.empty())
    throw DataError("Segmentation: length vectors must be non-empty and equal-sized");
  Segmentation seg;
  int sa = 1, sb = 1;
  for (std::size_t n = 0; n < src_lens.size(); ++n) {
    if (src_lens[n] < 1 || tgt_lens[n] < 1)
      throw DataError("Segmentation: sentence lengths must be >= 1");
    seg.a.push_back(sa);
    seg.b.push_back(sb);
    sa += src_lens[n];
    sb += tgt_lens[n];
  }
  return seg;
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

int sentence_of(const Segmentation& seg, Side side, int pos) {
  if (pos < 1) throw DataError("sentence_of: position must be >= 1");
  const auto& starts = side == Side::source ? seg.a : seg.b;
  // last start <= pos; the final sentence is open-ended
  const auto it = std::upper_bound(starts.begin(), starts.end(), pos);
  if (it == starts.begin()) throw DataError("sentence_of: position precedes first sentence");
  return static_cast<int>(it - starts.begin());
}

Rational catch_up_factor(int src_len, int tgt_len) {
  if (src_len < 1 || tgt_len < 1) throw DataError("catch_up_factor: lengths must be >= 1");
  return Rational(tgt_len, src_len);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& line : lines) out << line << '\n';
}

TokenStream read_stream_file(const std::string& path) {
  TokenStream stream;
  for (const auto& line : read_lines(path))
    for (auto& tok : tokenize(line)) stream.tokens.push_back(std::move(tok));
  return stream;
}

Segmentation read_segmentation_file(const std::string& path) {
  Segmentation seg;
  for (const auto& line : read_lines(path)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    int an = 0, bn = 0;
    if (!(ss >> an >> bn)) throw DataError("bad segmentation line: " + line);
    seg.a.push_back(an);
    seg.b.push_back(bn);
  }
  seg.validate();
  return seg;
}

void write_segmentation_file(const std::string& path, const Segmentation& seg) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (std::size_t i = 0; i < seg.a.size(); ++i) out << seg.a[i] << '\t' << seg.b[i] << '\n';
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace waitk
