#include "waitk/masks.hpp"

#include <algorithm>

namespace waitk {

EncoderKind encoder_kind_from_string(const std::string& name) {
  if (name == "bidir" || name == "bidirectional") return EncoderKind::bidirectional;
  if (name == "unidir" || name == "unidirectional") return EncoderKind::unidirectional;
  if (name == "pbe") return EncoderKind::pbe;
  throw ConfigError("unknown encoder kind: " + name);
}

std::string to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::bidirectional: return "bidirectional";
    case EncoderKind::unidirectional: return "unidirectional";
    case EncoderKind::pbe: return "pbe";
  }
  return "?";
}

void AttentionMask::allow_span(int row, PosSpan span) {
  for (int c = std::max(1, span.lo); c <= std::min(cols_, span.hi); ++c) set(row, c, true);
}

std::vector<int> AttentionMask::row_columns(int row) const {
  std::vector<int> out;
  for (int c = 1; c <= cols_; ++c)
    if (allowed(row, c)) out.push_back(c);
  return out;
}

bool AttentionMask::subset_of(const AttentionMask& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_) return false;
  for (std::size_t i = 0; i < allow_.size(); ++i)
    if (allow_[i] && !other.allow_[i]) return false;
  return true;
}

std::string AttentionMask::to_grid() const {
  std::string out;
  out.reserve(static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_ + 1));
  for (int r = 1; r <= rows_; ++r) {
    for (int c = 1; c <= cols_; ++c) out += allowed(r, c) ? '1' : '0';
    out += '\n';
  }
  return out;
}

namespace {

AttentionMask build_encoder_mask(EncoderKind kind, int k, int start, int available, int positions) {
  if (positions < 1) throw DataError("encoder_mask: need at least one position");
  if (start < 1 || start > positions) throw DataError("encoder_mask: window start out of range");
  if (available < start) throw DataError("encoder_mask: available span ends before window start");
  if (kind == EncoderKind::pbe && k < 1) throw ConfigError("encoder_mask: pbe requires k >= 1");

  AttentionMask mask(positions, positions);
  for (int j = 1; j <= positions; ++j) {
    if (j < start) {
      mask.set(j, j, true);  // outside the window: placeholder self-attention
      continue;
    }
    PosSpan span{start, 0};
    switch (kind) {
      case EncoderKind::bidirectional:
        span.hi = available;
        break;
      case EncoderKind::unidirectional:
        span.hi = j;
        break;
      case EncoderKind::pbe:
        span.hi = std::min(available, std::max(start + k - 1, j));
        break;
    }
    span.hi = std::min(span.hi, positions);
    mask.allow_span(j, span);
  }
  return mask;
}

}  // namespace

AttentionMask encoder_mask(const EncoderMaskSpec& spec, int positions) {
  const int available = spec.available > 0 ? spec.available : positions;
  return build_encoder_mask(spec.kind, spec.k, spec.start, available, positions);
}

AttentionMask encoder_mask_streaming(const EncoderMaskSpec& spec, int positions, int G_i,
                                     int H_i) {
  if (G_i < 1) throw DataError("encoder_mask_streaming: G must be >= 1");
  if (H_i < 1) throw DataError("encoder_mask_streaming: H must be >= 1");
  const int window_start = std::max(1, G_i - H_i + 1);
  return build_encoder_mask(spec.kind, spec.k, window_start, G_i, positions);
}

DecoderVisibility decoder_mask(int i, int b_n, int G_i, int H_i, int a_n) {
  if (i < 1) throw DataError("decoder_mask: target position must be >= 1");
  DecoderVisibility vis;
  const int self_lo = H_i > 0 ? std::max(1, i - H_i) : b_n;
  vis.self_allow = {self_lo, i};  // the prefix plus position i itself
  const int cross_lo = H_i > 0 ? std::max(1, G_i - H_i + 1) : a_n;
  vis.cross_allow = {cross_lo, G_i};
  return vis;
}

}  // namespace waitk
