#pragma once

#include <string>
#include <vector>

#include "waitk/text.hpp"

namespace waitk {

enum class EncoderKind { bidirectional, unidirectional, pbe };

EncoderKind encoder_kind_from_string(const std::string& name);
std::string to_string(EncoderKind kind);

/// Inclusive 1-based position span; empty when lo > hi.
struct PosSpan {
  int lo = 1;
  int hi = 0;

  bool contains(int p) const { return p >= lo && p <= hi; }
  bool empty() const { return lo > hi; }
  int length() const { return empty() ? 0 : hi - lo + 1; }
};

/// Boolean visibility matrix; rows index query positions, columns index key
/// positions, both 1-based. Every row keeps at least one allowed column.
class AttentionMask {
 public:
  AttentionMask(int rows, int cols) : rows_(rows), cols_(cols),
      allow_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  bool allowed(int row, int col) const { return allow_[index(row, col)] != 0; }
  void set(int row, int col, bool value) { allow_[index(row, col)] = value ? 1 : 0; }
  void allow_span(int row, PosSpan span);

  /// Allowed columns of one row, ascending.
  std::vector<int> row_columns(int row) const;

  bool operator==(const AttentionMask& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && allow_ == other.allow_;
  }

  /// Element-wise containment: every allowed cell of this mask is allowed in
  /// the other.
  bool subset_of(const AttentionMask& other) const;

  /// 0/1 grid, one row per line, for the debug CLI and test fixtures.
  std::string to_grid() const;

 private:
  std::size_t index(int row, int col) const {
    if (row < 1 || row > rows_ || col < 1 || col > cols_)
      throw DataError("AttentionMask: position out of range");
    return static_cast<std::size_t>(row - 1) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(col - 1);
  }

  int rows_, cols_;
  std::vector<std::uint8_t> allow_;
};

/// Parameters for one encoder visibility window.
///   bidirectional: row j sees [start, available]
///   unidirectional: row j sees [start, j]
///   pbe: row j sees [start, max(start + k - 1, j)], never past `available`
/// `start` is the sentence start when encoding sentence-level input and the
/// history-window start in streaming mode; `available` is G(i), the last
/// source position available at the timestep the mask is built for.
struct EncoderMaskSpec {
  EncoderKind kind = EncoderKind::bidirectional;
  int k = 1;          // pbe only
  int start = 1;      // a_n, or the streaming window start
  int available = 0;  // G(i); defaults to the full matrix when 0
};

/// Builds the positions x positions encoder visibility matrix. Rows before
/// `start` fall outside the window being encoded and keep self-attention only.
AttentionMask encoder_mask(const EncoderMaskSpec& spec, int positions);

/// Streaming variant: the window start becomes max(1, G_i - H_i + 1); for pbe
/// the forward allowance is anchored at that window start.
AttentionMask encoder_mask_streaming(const EncoderMaskSpec& spec, int positions, int G_i, int H_i);

/// Decoder visibility at target position i: self-attention over the target
/// prefix of the current sentence (or the last H_i tokens in streaming mode)
/// plus position i itself; cross-attention over exactly the encoder window.
struct DecoderVisibility {
  PosSpan self_allow;
  PosSpan cross_allow;
};

DecoderVisibility decoder_mask(int i, int b_n, int G_i, int H_i = 0, int a_n = 1);

}  // namespace waitk
