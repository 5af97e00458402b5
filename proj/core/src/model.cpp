#include "waitk/model.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace waitk {

void ModelConfig::validate() const {
  if (layers < 1) throw ConfigError("ModelConfig: layers must be >= 1");
  if (model_dim < 2 || model_dim % heads != 0)
    throw ConfigError("ModelConfig: model_dim must divide by heads");
  if (heads < 1) throw ConfigError("ModelConfig: heads must be >= 1");
  if (ffn_dim < 1) throw ConfigError("ModelConfig: ffn_dim must be >= 1");
  if (vocab_size < markers::kReservedCount)
    throw ConfigError("ModelConfig: vocab_size must cover the reserved tokens");
  if (label_smoothing < 0.0 || label_smoothing >= 1.0)
    throw ConfigError("ModelConfig: label_smoothing must be in [0, 1)");
  if (history < 0) throw ConfigError("ModelConfig: history must be >= 0");
}

// ---- samples -------------------------------------------------------------

namespace {

std::vector<int> marker_starts(const std::vector<TokenId>& ids, const char* side) {
  if (ids.size() < 2) throw DataError(std::string("Sample: ") + side + " too short");
  if (ids.front() != markers::kDoc && ids.front() != markers::kCont)
    throw DataError(std::string("Sample: ") + side + " must start with <DOC> or <CONT>");
  if (ids.back() != markers::kBrk && ids.back() != markers::kEnd)
    throw DataError(std::string("Sample: ") + side + " must end with <BRK> or <END>");
  std::vector<int> starts{1};
  for (int p = 2; p < static_cast<int>(ids.size()); ++p)
    if (ids[static_cast<std::size_t>(p - 1)] == markers::kSep) starts.push_back(p);
  return starts;
}

}  // namespace

Sample make_sample(std::vector<TokenId> src, std::vector<TokenId> tgt) {
  Sample s;
  s.seg.a = marker_starts(src, "source");
  s.seg.b = marker_starts(tgt, "target");
  if (s.seg.a.size() != s.seg.b.size())
    throw DataError("Sample: source and target sentence counts differ");
  s.src = std::move(src);
  s.tgt = std::move(tgt);
  s.seg.validate();
  return s;
}

int sample_source_real_len(const Sample& s, int n) {
  const int sentences = s.seg.sentence_count();
  const int a_n = s.seg.start(Side::source, n);
  const int end = n < sentences ? s.seg.start(Side::source, n + 1) - 1
                                : static_cast<int>(s.src.size()) - 1;  // drop trailing marker
  return end - a_n;  // drop the leading marker as well
}

int sample_cross_limit(const Sample& s, int p, int k, const Rational& gamma) {
  const int tgt_len = static_cast<int>(s.tgt.size());
  const int src_len = static_cast<int>(s.src.size());
  if (p < 2 || p > tgt_len) throw DataError("sample_cross_limit: position out of range");
  if (p == tgt_len) return src_len;  // trailing <BRK>/<END> sees the closed source
  const int n = sentence_of(s.seg, Side::target, p);
  const int b_n = s.seg.start(Side::target, n);
  if (p == b_n) return s.seg.start(Side::source, n);  // leading <SEP> sees through the source <SEP>
  const int rel = p - b_n;  // 1-based real-token index in sentence n
  const int delay = k + static_cast<int>(floor_div_by(rel - 1, gamma));
  const int real_len = sample_source_real_len(s, n);
  // a saturated delay reads through the sentence's closing signal (the next
  // <SEP> or the trailing marker), matching what a decoder sees after the
  // boundary event forces it to catch up
  if (delay >= real_len) return s.seg.start(Side::source, n) + real_len + 1;
  return s.seg.start(Side::source, n) + delay;
}

// ---- parameters ----------------------------------------------------------

void LayerNormParams::init(const std::string& prefix, int dim) {
  Rng dummy(0);
  gain.init(prefix + ".gain", 1, dim, 0.0, dummy);
  gain.value.fill(1.0);
  bias.init(prefix + ".bias", 1, dim, 0.0, dummy);
}

void LayerNormParams::visit(const ParamVisitor& fn) {
  fn(gain);
  fn(bias);
}

void FfnParams::init(const std::string& prefix, int dim, int ffn_dim, Rng& rng) {
  w1.init(prefix + ".w1", dim, ffn_dim, 1.0 / std::sqrt(static_cast<double>(dim)), rng);
  b1.init(prefix + ".b1", 1, ffn_dim, 0.0, rng);
  w2.init(prefix + ".w2", ffn_dim, dim, 1.0 / std::sqrt(static_cast<double>(ffn_dim)), rng);
  b2.init(prefix + ".b2", 1, dim, 0.0, rng);
}

void FfnParams::visit(const ParamVisitor& fn) {
  fn(w1);
  fn(b1);
  fn(w2);
  fn(b2);
}

void EncoderLayerParams::visit(const ParamVisitor& fn) {
  ln1.visit(fn);
  attn.visit(fn);
  ln2.visit(fn);
  ffn.visit(fn);
}

void DecoderLayerParams::visit(const ParamVisitor& fn) {
  ln1.visit(fn);
  self_attn.visit(fn);
  ln2.visit(fn);
  cross_attn.visit(fn);
  ln3.visit(fn);
  ffn.visit(fn);
}

void ModelParams::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.model_dim));
  embedding.init("embedding", config.vocab_size, config.model_dim, scale, rng);
  encoder.assign(static_cast<std::size_t>(config.layers), {});
  decoder.assign(static_cast<std::size_t>(config.layers), {});
  for (int l = 0; l < config.layers; ++l) {
    const std::string ep = "enc." + std::to_string(l);
    auto& e = encoder[static_cast<std::size_t>(l)];
    e.ln1.init(ep + ".ln1", config.model_dim);
    e.attn.init(ep + ".attn", config.model_dim, rng);
    e.ln2.init(ep + ".ln2", config.model_dim);
    e.ffn.init(ep + ".ffn", config.model_dim, config.ffn_dim, rng);
    const std::string dp = "dec." + std::to_string(l);
    auto& d = decoder[static_cast<std::size_t>(l)];
    d.ln1.init(dp + ".ln1", config.model_dim);
    d.self_attn.init(dp + ".self", config.model_dim, rng);
    d.ln2.init(dp + ".ln2", config.model_dim);
    d.cross_attn.init(dp + ".cross", config.model_dim, rng);
    d.ln3.init(dp + ".ln3", config.model_dim);
    d.ffn.init(dp + ".ffn", config.model_dim, config.ffn_dim, rng);
  }
  enc_final.init("enc.final", config.model_dim);
  dec_final.init("dec.final", config.model_dim);
  out_w.init("out.w", config.model_dim, config.vocab_size, scale, rng);
  out_b.init("out.b", 1, config.vocab_size, 0.0, rng);
}

void ModelParams::visit(const ParamVisitor& fn) {
  fn(embedding);
  for (auto& e : encoder) e.visit(fn);
  enc_final.visit(fn);
  for (auto& d : decoder) d.visit(fn);
  dec_final.visit(fn);
  fn(out_w);
  fn(out_b);
}

std::vector<Param*> ModelParams::all() {
  std::vector<Param*> out;
  visit([&out](Param& p) { out.push_back(&p); });
  return out;
}

void ModelParams::zero_grads() {
  visit([](Param& p) { p.zero_grad(); });
}

// ---- masks ---------------------------------------------------------------

MaskSet training_masks(const Sample& sample, const ModelConfig& config, int k,
                       const Rational& gamma) {
  if (config.encoder_kind == EncoderKind::bidirectional)
    throw ConfigError("training_masks: bidirectional training runs one pass per position");
  const int src_len = static_cast<int>(sample.src.size());
  const int tgt_rows = static_cast<int>(sample.tgt.size()) - 1;
  if (tgt_rows < 1) throw DataError("training_masks: target too short");

  EncoderMaskSpec spec;
  spec.kind = config.encoder_kind;
  spec.k = k;
  spec.start = 1;  // the sample is the visibility window
  spec.available = src_len;
  AttentionMask enc = encoder_mask(spec, src_len);

  AttentionMask dec_self(tgt_rows, tgt_rows);
  for (int q = 1; q <= tgt_rows; ++q) dec_self.allow_span(q, {1, q});

  AttentionMask cross(tgt_rows, src_len);
  for (int r = 1; r <= tgt_rows; ++r)
    cross.allow_span(r, {1, sample_cross_limit(sample, r + 1, k, gamma)});

  return {std::move(enc), std::move(dec_self), std::move(cross)};
}

// ---- forward/backward ----------------------------------------------------

namespace {

Matrix positional_encoding(int length, int dim) {
  Matrix pe(length, dim);
  for (int pos = 1; pos <= length; ++pos)
    for (int j = 0; j < dim; ++j) {
      const double exponent = static_cast<double>(2 * (j / 2)) / dim;
      const double angle = pos / std::pow(10000.0, exponent);
      pe.at(pos - 1, j) = (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  return pe;
}

Matrix embed(const ModelParams& params, const ModelConfig& config,
             const std::vector<TokenId>& ids) {
  const int n = static_cast<int>(ids.size());
  const int d = config.model_dim;
  const double scale = std::sqrt(static_cast<double>(d));
  Matrix x = positional_encoding(n, d);
  for (int i = 0; i < n; ++i) {
    const TokenId id = ids[static_cast<std::size_t>(i)];
    if (id < 0 || id >= config.vocab_size) throw DataError("embed: token id out of range");
    for (int j = 0; j < d; ++j) x.at(i, j) += scale * params.embedding.value.at(id, j);
  }
  return x;
}

void embed_backward(Param& embedding, const ModelConfig& config,
                    const std::vector<TokenId>& ids, const Matrix& dx) {
  const double scale = std::sqrt(static_cast<double>(config.model_dim));
  for (int i = 0; i < dx.rows; ++i) {
    const TokenId id = ids[static_cast<std::size_t>(i)];
    for (int j = 0; j < dx.cols; ++j) embedding.grad.at(id, j) += scale * dx.at(i, j);
  }
}

struct FfnCache {
  Matrix h_pre, h_act;
};

Matrix ffn_forward(const Matrix& x, const FfnParams& p, FfnCache& cache) {
  cache.h_pre = linear_forward(x, p.w1, p.b1);
  cache.h_act = gelu_forward(cache.h_pre);
  return linear_forward(cache.h_act, p.w2, p.b2);
}

Matrix ffn_backward(const Matrix& x, FfnParams& p, const FfnCache& cache, const Matrix& dy) {
  const Matrix dh_act = linear_backward(cache.h_act, p.w2, p.b2, dy);
  const Matrix dh_pre = gelu_backward(cache.h_pre, dh_act);
  return linear_backward(x, p.w1, p.b1, dh_pre);
}

struct EncLayerCache {
  Matrix x_in, n1, x2, n2;
  LayerNormCache ln1c, ln2c;
  AttentionCache att;
  FfnCache ffn;
};

struct EncCache {
  Matrix x0;
  std::vector<EncLayerCache> layers;
  LayerNormCache fc;
  Matrix out;
};

Matrix encode_cached(const ModelParams& params, const ModelConfig& config,
                     const std::vector<TokenId>& src, const AttentionMask& enc_mask,
                     EncCache& cache) {
  cache.x0 = embed(params, config, src);
  Matrix x = cache.x0;
  cache.layers.resize(params.encoder.size());
  for (std::size_t l = 0; l < params.encoder.size(); ++l) {
    const auto& p = params.encoder[l];
    auto& c = cache.layers[l];
    c.x_in = x;
    c.n1 = layernorm_forward(x, p.ln1.gain, p.ln1.bias, c.ln1c);
    Matrix a = attention_forward(c.n1, c.n1, p.attn, config.heads, enc_mask, c.att);
    add_inplace(a, x);
    c.x2 = std::move(a);
    c.n2 = layernorm_forward(c.x2, p.ln2.gain, p.ln2.bias, c.ln2c);
    Matrix f = ffn_forward(c.n2, p.ffn, c.ffn);
    add_inplace(f, c.x2);
    x = std::move(f);
  }
  cache.out = layernorm_forward(x, params.enc_final.gain, params.enc_final.bias, cache.fc);
  return cache.out;
}

void encode_backward(ModelParams& params, const ModelConfig& config,
                     const std::vector<TokenId>& src, const AttentionMask& enc_mask,
                     const EncCache& cache, const Matrix& dout) {
  Matrix dx = layernorm_backward(params.enc_final.gain, params.enc_final.bias, cache.fc, dout);
  for (std::size_t li = params.encoder.size(); li-- > 0;) {
    auto& p = params.encoder[li];
    const auto& c = cache.layers[li];
    // x3 = x2 + ffn(n2)
    const Matrix dn2 = ffn_backward(c.n2, p.ffn, c.ffn, dx);
    Matrix dx2 = layernorm_backward(p.ln2.gain, p.ln2.bias, c.ln2c, dn2);
    add_inplace(dx2, dx);
    // x2 = x + attn(n1)
    AttentionGrads ag = attention_backward(c.n1, c.n1, p.attn, config.heads, enc_mask, c.att, dx2);
    add_inplace(ag.dx_q, ag.dx_kv);
    Matrix dx1 = layernorm_backward(p.ln1.gain, p.ln1.bias, c.ln1c, ag.dx_q);
    add_inplace(dx1, dx2);
    dx = std::move(dx1);
  }
  embed_backward(params.embedding, config, src, dx);
}

struct DecLayerCache {
  Matrix y_in, n1, y2, n2, y3, n3;
  LayerNormCache ln1c, ln2c, ln3c;
  AttentionCache self_att, cross_att;
  FfnCache ffn;
};

struct DecCache {
  Matrix y0;
  std::vector<DecLayerCache> layers;
  LayerNormCache fc;
  Matrix out;
  Matrix logits;
};

Matrix decode_cached(const ModelParams& params, const ModelConfig& config,
                     const Matrix& enc_out, const std::vector<TokenId>& tgt_input,
                     const AttentionMask& dec_self, const AttentionMask& cross,
                     DecCache& cache) {
  cache.y0 = embed(params, config, tgt_input);
  Matrix y = cache.y0;
  cache.layers.resize(params.decoder.size());
  for (std::size_t l = 0; l < params.decoder.size(); ++l) {
    const auto& p = params.decoder[l];
    auto& c = cache.layers[l];
    c.y_in = y;
    c.n1 = layernorm_forward(y, p.ln1.gain, p.ln1.bias, c.ln1c);
    Matrix a = attention_forward(c.n1, c.n1, p.self_attn, config.heads, dec_self, c.self_att);
    add_inplace(a, y);
    c.y2 = std::move(a);
    c.n2 = layernorm_forward(c.y2, p.ln2.gain, p.ln2.bias, c.ln2c);
    Matrix x = attention_forward(c.n2, enc_out, p.cross_attn, config.heads, cross, c.cross_att);
    add_inplace(x, c.y2);
    c.y3 = std::move(x);
    c.n3 = layernorm_forward(c.y3, p.ln3.gain, p.ln3.bias, c.ln3c);
    Matrix f = ffn_forward(c.n3, p.ffn, c.ffn);
    add_inplace(f, c.y3);
    y = std::move(f);
  }
  cache.out = layernorm_forward(y, params.dec_final.gain, params.dec_final.bias, cache.fc);
  cache.logits = linear_forward(cache.out, params.out_w, params.out_b);
  return cache.logits;
}

/// Returns d(enc_out) accumulated over the cross-attention layers.
Matrix decode_backward(ModelParams& params, const ModelConfig& config, const Matrix& enc_out,
                       const std::vector<TokenId>& tgt_input, const AttentionMask& dec_self,
                       const AttentionMask& cross, const DecCache& cache,
                       const Matrix& dlogits) {
  Matrix denc(enc_out.rows, enc_out.cols);
  const Matrix dout = linear_backward(cache.out, params.out_w, params.out_b, dlogits);
  Matrix dy = layernorm_backward(params.dec_final.gain, params.dec_final.bias, cache.fc, dout);
  for (std::size_t li = params.decoder.size(); li-- > 0;) {
    auto& p = params.decoder[li];
    const auto& c = cache.layers[li];
    const Matrix dn3 = ffn_backward(c.n3, p.ffn, c.ffn, dy);
    Matrix dy3 = layernorm_backward(p.ln3.gain, p.ln3.bias, c.ln3c, dn3);
    add_inplace(dy3, dy);
    AttentionGrads xg = attention_backward(c.n2, enc_out, p.cross_attn, config.heads, cross,
                                           c.cross_att, dy3);
    add_inplace(denc, xg.dx_kv);
    Matrix dy2 = layernorm_backward(p.ln2.gain, p.ln2.bias, c.ln2c, xg.dx_q);
    add_inplace(dy2, dy3);
    AttentionGrads sg = attention_backward(c.n1, c.n1, p.self_attn, config.heads, dec_self,
                                           c.self_att, dy2);
    add_inplace(sg.dx_q, sg.dx_kv);
    Matrix dy1 = layernorm_backward(p.ln1.gain, p.ln1.bias, c.ln1c, sg.dx_q);
    add_inplace(dy1, dy2);
    dy = std::move(dy1);
  }
  embed_backward(params.embedding, config, tgt_input, dy);
  return denc;
}

std::vector<TokenId> decoder_input(const std::vector<TokenId>& tgt) {
  return std::vector<TokenId>(tgt.begin(), tgt.end() - 1);
}

}  // namespace

Matrix encode(const ModelParams& params, const ModelConfig& config,
              const std::vector<TokenId>& src, const AttentionMask& enc_mask) {
  EncCache cache;
  return encode_cached(params, config, src, enc_mask, cache);
}

Matrix forward(const ModelParams& params, const ModelConfig& config,
               const std::vector<TokenId>& src, const std::vector<TokenId>& tgt,
               const MaskSet& masks) {
  config.validate();
  if (tgt.size() < 2) throw DataError("forward: target must have at least two tokens");
  EncCache enc_cache;
  const Matrix enc_out = encode_cached(params, config, src, masks.enc, enc_cache);
  DecCache dec_cache;
  const Matrix logits = decode_cached(params, config, enc_out, decoder_input(tgt),
                                      masks.dec_self, masks.cross, dec_cache);
  return softmax_rows(logits);
}

std::vector<double> next_token_distribution(const ModelParams& params, const ModelConfig& config,
                                            const std::vector<TokenId>& src,
                                            const std::vector<TokenId>& tgt_prefix,
                                            const MaskSet& masks) {
  if (tgt_prefix.empty()) throw DataError("next_token_distribution: empty prefix");
  EncCache enc_cache;
  const Matrix enc_out = encode_cached(params, config, src, masks.enc, enc_cache);
  DecCache dec_cache;
  const Matrix logits =
      decode_cached(params, config, enc_out, tgt_prefix, masks.dec_self, masks.cross, dec_cache);
  const Matrix probs = softmax_rows(take_rows(logits, logits.rows - 1, 1));
  return probs.a;
}

namespace {

/// Scored target positions of a sample: every p in 2..T, or only the current
/// (final) sentence's positions when history tokens are excluded.
std::vector<int> scored_positions(const Sample& s, const ModelConfig& config) {
  std::vector<int> out;
  const int tgt_len = static_cast<int>(s.tgt.size());
  const int first = config.loss_on_history ? 2 : std::max(2, s.seg.b.back());
  for (int p = first; p <= tgt_len; ++p) out.push_back(p);
  return out;
}

}  // namespace

double loss_and_gradients(ModelParams& params, const ModelConfig& config,
                          const TrainingBatch& batch) {
  config.validate();
  if (batch.k < 1) throw ConfigError("loss_and_gradients: k must be >= 1");
  params.zero_grads();

  long total_rows = 0;
  for (const auto& s : batch.samples)
    if (s.tgt.size() >= 2) total_rows += static_cast<long>(scored_positions(s, config).size());
  if (total_rows == 0) return 0.0;
  const double grad_scale = 1.0 / static_cast<double>(total_rows);

  double loss_sum = 0.0;
  for (const auto& sample : batch.samples) {
    if (sample.tgt.size() < 2) continue;
    const auto positions = scored_positions(sample, config);
    const auto tgt_input = decoder_input(sample.tgt);

    if (config.encoder_kind != EncoderKind::bidirectional) {
      const MaskSet masks = training_masks(sample, config, batch.k, batch.gamma);
      EncCache enc_cache;
      const Matrix enc_out = encode_cached(params, config, sample.src, masks.enc, enc_cache);
      DecCache dec_cache;
      const Matrix logits = decode_cached(params, config, enc_out, tgt_input, masks.dec_self,
                                          masks.cross, dec_cache);
      std::vector<std::pair<int, int>> targets;
      for (const int p : positions)
        targets.emplace_back(p - 2, sample.tgt[static_cast<std::size_t>(p - 1)]);
      Matrix dlogits;
      loss_sum += smoothed_cross_entropy(logits, targets, config.label_smoothing, dlogits,
                                         grad_scale);
      const Matrix denc = decode_backward(params, config, enc_out, tgt_input, masks.dec_self,
                                          masks.cross, dec_cache, dlogits);
      encode_backward(params, config, sample.src, masks.enc, enc_cache, denc);
      continue;
    }

    // Bidirectional encoder training: the encoder state of every position
    // depends on what is available at the decoding timestep, so each scored
    // position gets its own constrained pass.
    const int src_len = static_cast<int>(sample.src.size());
    for (const int p : positions) {
      const int limit = sample_cross_limit(sample, p, batch.k, batch.gamma);
      EncoderMaskSpec spec;
      spec.kind = EncoderKind::bidirectional;
      spec.start = 1;
      spec.available = limit;
      const AttentionMask enc_mask = encoder_mask(spec, src_len);

      const int rows = p - 1;
      const std::vector<TokenId> prefix(tgt_input.begin(), tgt_input.begin() + rows);
      AttentionMask dec_self(rows, rows);
      for (int q = 1; q <= rows; ++q) dec_self.allow_span(q, {1, q});
      AttentionMask cross(rows, src_len);
      for (int r = 1; r <= rows; ++r) cross.allow_span(r, {1, limit});

      EncCache enc_cache;
      const Matrix enc_out = encode_cached(params, config, sample.src, enc_mask, enc_cache);
      DecCache dec_cache;
      const Matrix logits =
          decode_cached(params, config, enc_out, prefix, dec_self, cross, dec_cache);
      const std::vector<std::pair<int, int>> targets{
          {rows - 1, sample.tgt[static_cast<std::size_t>(p - 1)]}};
      Matrix dlogits;
      loss_sum += smoothed_cross_entropy(logits, targets, config.label_smoothing, dlogits,
                                         grad_scale);
      const Matrix denc =
          decode_backward(params, config, enc_out, prefix, dec_self, cross, dec_cache, dlogits);
      encode_backward(params, config, sample.src, enc_mask, enc_cache, denc);
    }
  }
  return loss_sum / static_cast<double>(total_rows);
}

// ---- incremental encoding -------------------------------------------------

IncrementalEncoder incremental_init(const ModelConfig& config) {
  config.validate();
  if (config.encoder_kind != EncoderKind::unidirectional)
    throw ConfigError("incremental encoding requires the unidirectional encoder");
  IncrementalEncoder state;
  state.layer_inputs.assign(static_cast<std::size_t>(config.layers) + 1,
                            Matrix(0, config.model_dim));
  state.encoded = Matrix(0, config.model_dim);
  return state;
}

void incremental_push(const ModelParams& params, const ModelConfig& config,
                      IncrementalEncoder& state, TokenId token) {
  const int j = state.length + 1;
  const int d = config.model_dim;

  auto append_row = [](Matrix& m, const Matrix& row) {
    Matrix grown(m.rows + 1, row.cols);
    for (int i = 0; i < m.rows; ++i)
      for (int c = 0; c < row.cols; ++c) grown.at(i, c) = m.at(i, c);
    for (int c = 0; c < row.cols; ++c) grown.at(m.rows, c) = row.at(0, c);
    m = std::move(grown);
  };

  if (token < 0 || token >= config.vocab_size) throw DataError("incremental_push: bad token id");
  Matrix x_new(1, d);
  {
    // same arithmetic as embed() at position j
    const Matrix pe = positional_encoding(j, d);
    const double scale = std::sqrt(static_cast<double>(d));
    for (int c = 0; c < d; ++c)
      x_new.at(0, c) = pe.at(j - 1, c) + scale * params.embedding.value.at(token, c);
  }

  append_row(state.layer_inputs[0], x_new);
  for (std::size_t l = 0; l < params.encoder.size(); ++l) {
    const auto& p = params.encoder[l];
    Matrix& x_all = state.layer_inputs[l];

    LayerNormCache lnc;
    const Matrix n_all = layernorm_forward(x_all, p.ln1.gain, p.ln1.bias, lnc);
    const Matrix q = take_rows(n_all, j - 1, 1);

    AttentionMask row_mask(1, j);
    row_mask.allow_span(1, {1, j});
    AttentionCache att;
    Matrix a = attention_forward(q, n_all, p.attn, config.heads, row_mask, att);
    const Matrix x_row = take_rows(x_all, j - 1, 1);
    add_inplace(a, x_row);

    LayerNormCache ln2c;
    const Matrix n2 = layernorm_forward(a, p.ln2.gain, p.ln2.bias, ln2c);
    FfnCache fc;
    Matrix f = ffn_forward(n2, p.ffn, fc);
    add_inplace(f, a);
    append_row(state.layer_inputs[l + 1], f);
  }

  LayerNormCache fc;
  const Matrix stack_row = take_rows(state.layer_inputs[params.encoder.size()], j - 1, 1);
  const Matrix encoded_row =
      layernorm_forward(stack_row, params.enc_final.gain, params.enc_final.bias, fc);
  append_row(state.encoded, encoded_row);
  state.length = j;
}

// ---- checkpoints -----------------------------------------------------------

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const ModelConfig& config, const Vocabulary& vocab) {
  if (static_cast<int>(vocab.size()) != config.vocab_size)
    throw ConfigError("save_checkpoint: vocabulary size differs from config");
  nlohmann::json j;
  j["format"] = "waitk-checkpoint-1";
  {
    std::vector<std::string> surfaces;
    for (TokenId id = 0; id < static_cast<TokenId>(vocab.size()); ++id)
      surfaces.push_back(vocab.surface(id));
    j["vocab"] = std::move(surfaces);
  }
  j["config"] = {
      {"layers", config.layers},
      {"model_dim", config.model_dim},
      {"heads", config.heads},
      {"ffn_dim", config.ffn_dim},
      {"vocab_size", config.vocab_size},
      {"encoder_kind", to_string(config.encoder_kind)},
      {"history", config.history},
      {"label_smoothing", config.label_smoothing},
      {"loss_on_history", config.loss_on_history},
  };
  nlohmann::json tensors = nlohmann::json::object();
  const_cast<ModelParams&>(params).visit([&tensors](Param& p) {
    tensors[p.name] = {{"rows", p.value.rows}, {"cols", p.value.cols}, {"data", p.value.a}};
  });
  j["params"] = std::move(tensors);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump();
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad checkpoint " + path + ": " + e.what());
  }
  if (j.value("format", "") != "waitk-checkpoint-1")
    throw DataError("unsupported checkpoint format in " + path);

  Checkpoint ckpt;
  const auto& c = j.at("config");
  ckpt.config.layers = c.at("layers").get<int>();
  ckpt.config.model_dim = c.at("model_dim").get<int>();
  ckpt.config.heads = c.at("heads").get<int>();
  ckpt.config.ffn_dim = c.at("ffn_dim").get<int>();
  ckpt.config.vocab_size = c.at("vocab_size").get<int>();
  ckpt.config.encoder_kind = encoder_kind_from_string(c.at("encoder_kind").get<std::string>());
  ckpt.config.history = c.at("history").get<int>();
  ckpt.config.label_smoothing = c.at("label_smoothing").get<double>();
  ckpt.config.loss_on_history = c.at("loss_on_history").get<bool>();

  for (const auto& surface : j.at("vocab").get<std::vector<std::string>>())
    ckpt.vocab.add(surface);
  if (static_cast<int>(ckpt.vocab.size()) != ckpt.config.vocab_size)
    throw DataError("checkpoint " + path + ": vocabulary/config size mismatch");

  ckpt.params.init(ckpt.config, 0);
  const auto& tensors = j.at("params");
  ckpt.params.visit([&tensors, &path](Param& p) {
    if (!tensors.contains(p.name)) throw DataError("checkpoint " + path + " missing " + p.name);
    const auto& t = tensors.at(p.name);
    if (t.at("rows").get<int>() != p.value.rows || t.at("cols").get<int>() != p.value.cols)
      throw DataError("checkpoint " + path + ": shape mismatch for " + p.name);
    p.value.a = t.at("data").get<std::vector<double>>();
  });
  return ckpt;
}

}  // namespace waitk
