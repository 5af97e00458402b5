#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "waitk/rational.hpp"

namespace waitk {

/// Raised when a run configuration is unusable (maps to CLI exit code 2).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Raised when input data violates a contract (maps to CLI exit code 3).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using TokenId = std::int32_t;

/// Special-token conventions shared by every module. The marker ids are fixed
/// so that files, checkpoints and tests can rely on them.
namespace markers {
inline constexpr TokenId kDoc = 0;   // <DOC>  sample history reaches the document start
inline constexpr TokenId kCont = 1;  // <CONT> sample history starts mid-document
inline constexpr TokenId kSep = 2;   // <SEP>  sentence separator inside a sample
inline constexpr TokenId kBrk = 3;   // <BRK>  sample ends, document continues
inline constexpr TokenId kEnd = 4;   // <END>  sample ends with the document
inline constexpr TokenId kUnk = 5;   // <UNK>  out-of-vocabulary surface
inline constexpr TokenId kPad = 6;   // <PAD>  batch padding only, never in streams
inline constexpr int kReservedCount = 7;
}  // namespace markers

struct Token {
  std::string surface;
  TokenId id = markers::kUnk;
};

/// Ordered set of unique surfaces. Indices 0..6 are the reserved surfaces
/// <DOC> <CONT> <SEP> <BRK> <END> <UNK> <PAD>, in that order.
class Vocabulary {
 public:
  Vocabulary();

  /// Adds a surface if absent, returns its id either way.
  TokenId add(const std::string& surface);

  /// Id for a surface; <UNK> when the surface is not in the vocabulary.
  TokenId lookup(const std::string& surface) const;

  bool contains(const std::string& surface) const;
  const std::string& surface(TokenId id) const;
  std::size_t size() const { return entries_.size(); }

  static bool is_marker(TokenId id) { return id >= markers::kDoc && id <= markers::kEnd; }
  static bool is_reserved(TokenId id) { return id >= 0 && id < markers::kReservedCount; }

  /// Builds a vocabulary from whitespace-tokenized lines.
  static Vocabulary from_lines(const std::vector<std::string>& lines);

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, TokenId> index_;
};

/// Ordered token sequence with 1-based, contiguous positions.
struct TokenStream {
  std::vector<std::string> tokens;

  int length() const { return static_cast<int>(tokens.size()); }
  const std::string& at(int pos) const {  // pos is 1-based
    if (pos < 1 || pos > length()) throw DataError("TokenStream: position out of range");
    return tokens[static_cast<std::size_t>(pos - 1)];
  }
  std::vector<TokenId> ids(const Vocabulary& vocab) const;
};

enum class Side { source, target };

/// Paired sentence-start vectors: source sentence n starts at a[n-1], target
/// sentence n at b[n-1]. Both 1-based, strictly increasing, starting at 1.
struct Segmentation {
  std::vector<int> a;
  std::vector<int> b;

  int sentence_count() const { return static_cast<int>(a.size()); }
  void validate() const;

  int start(Side side, int n) const {  // n is 1-based
    const auto& v = side == Side::source ? a : b;
    return v.at(static_cast<std::size_t>(n - 1));
  }

  /// Source length of sentence n given the total stream length.
  int source_len(int n, int src_total) const;
  int target_len(int n, int tgt_total) const;

  static Segmentation from_lengths(const std::vector<int>& src_lens,
                                   const std::vector<int>& tgt_lens);
};

/// History bounds: h limits training-sample history tokens, H bounds the
/// inference-time window. h = 0 means sentence-level.
struct HistoryConfig {
  int h = 0;
  int H = 0;
};

/// Splits on runs of whitespace. Marker surfaces are ordinary tokens here.
std::vector<std::string> tokenize(const std::string& line);

/// The unique n with start_n <= pos < start_{n+1}; the last sentence is
/// open-ended. pos < 1 is rejected.
int sentence_of(const Segmentation& seg, Side side, int pos);

/// gamma = tgt_len / src_len, exact.
Rational catch_up_factor(int src_len, int tgt_len);

// ---- file formats ------------------------------------------------------
// Stream file: one whitespace-tokenized segment per line (a single-line file
// is one concatenated stream). Segmentation file: one "a_n<TAB>b_n" per line.

std::vector<std::string> read_lines(const std::string& path);
void write_lines(const std::string& path, const std::vector<std::string>& lines);

TokenStream read_stream_file(const std::string& path);
Segmentation read_segmentation_file(const std::string& path);
void write_segmentation_file(const std::string& path, const Segmentation& seg);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace waitk
