#pragma once

#include <string>
#include <vector>

#include "waitk/masks.hpp"
#include "waitk/nn.hpp"
#include "waitk/policy.hpp"
#include "waitk/text.hpp"

namespace waitk {

/// Desk-scale encoder-decoder configuration. One or two layers and a dim of
/// 32 are enough to exercise every masking scheme and the streaming history.
struct ModelConfig {
  int layers = 1;
  int model_dim = 32;
  int heads = 1;
  int ffn_dim = 64;
  int vocab_size = 0;
  EncoderKind encoder_kind = EncoderKind::unidirectional;
  int history = 0;  // h: streaming-history token budget the model was trained with
  double label_smoothing = 0.1;
  bool loss_on_history = true;  // include history target positions in the loss

  void validate() const;
};

/// One training/decoding sample: marker-wrapped source and target id
/// sequences plus the within-sample segmentation. Sentence n starts at its
/// leading marker (<DOC>/<CONT> for n=1, <SEP> otherwise); the sample's final
/// token is <BRK> or <END>.
struct Sample {
  std::vector<TokenId> src;
  std::vector<TokenId> tgt;
  Segmentation seg;
};

/// Derives the segmentation from the marker layout and validates the marker
/// grammar on both sides.
Sample make_sample(std::vector<TokenId> src, std::vector<TokenId> tgt);

/// Number of real (non-marker) source tokens of sentence n, in-sample.
int sample_source_real_len(const Sample& s, int n);

/// Last source position visible when predicting target position p (p >= 2):
/// the per-sentence wait-k delay over real tokens, capped at the sentence's
/// source end; leading markers see through the previous sentence, the
/// trailing marker sees the whole source.
int sample_cross_limit(const Sample& s, int p, int k, const Rational& gamma);

struct LayerNormParams {
  Param gain, bias;
  void init(const std::string& prefix, int dim);
  void visit(const ParamVisitor& fn);
};

struct FfnParams {
  Param w1, b1, w2, b2;
  void init(const std::string& prefix, int dim, int ffn_dim, Rng& rng);
  void visit(const ParamVisitor& fn);
};

struct EncoderLayerParams {
  LayerNormParams ln1, ln2;
  AttentionParams attn;
  FfnParams ffn;
  void visit(const ParamVisitor& fn);
};

struct DecoderLayerParams {
  LayerNormParams ln1, ln2, ln3;
  AttentionParams self_attn, cross_attn;
  FfnParams ffn;
  void visit(const ParamVisitor& fn);
};

struct ModelParams {
  Param embedding;  // vocab x dim, shared between source and target
  std::vector<EncoderLayerParams> encoder;
  std::vector<DecoderLayerParams> decoder;
  LayerNormParams enc_final, dec_final;
  Param out_w, out_b;  // dim x vocab, 1 x vocab

  void init(const ModelConfig& config, std::uint64_t seed);
  void visit(const ParamVisitor& fn);
  std::vector<Param*> all();
  void zero_grads();
};

/// Boolean masks for one teacher-forced pass: encoder self-attention (J x J),
/// decoder self-attention and decoder-to-encoder cross attention over the
/// T-1 decoder input rows.
struct MaskSet {
  AttentionMask enc;
  AttentionMask dec_self;
  AttentionMask cross;
};

/// Masks for a single-pass training step of the given sample (unidirectional
/// or pbe encoder; the bidirectional encoder needs one pass per target
/// position and is handled inside loss_and_gradients).
MaskSet training_masks(const Sample& sample, const ModelConfig& config, int k,
                       const Rational& gamma);

/// Encoder-only forward: embeds, runs the layer stack under the mask, applies
/// the final norm. Returns J x dim states.
Matrix encode(const ModelParams& params, const ModelConfig& config,
              const std::vector<TokenId>& src, const AttentionMask& enc_mask);

/// Full teacher-forced pass. tgt must have length >= 2 (head marker plus at
/// least one predicted position); the result row r is the normalized
/// next-token distribution for target position r + 2.
Matrix forward(const ModelParams& params, const ModelConfig& config,
               const std::vector<TokenId>& src, const std::vector<TokenId>& tgt,
               const MaskSet& masks);

/// Distribution over the next target token given a prefix; masks are sized
/// for the prefix (dec_self/cross have one row per prefix position). Used by
/// greedy decoding.
std::vector<double> next_token_distribution(const ModelParams& params, const ModelConfig& config,
                                            const std::vector<TokenId>& src,
                                            const std::vector<TokenId>& tgt_prefix,
                                            const MaskSet& masks);

struct TrainingBatch {
  std::vector<Sample> samples;
  int k = 1;
  Rational gamma = Rational(1, 1);
};

/// Label-smoothed cross entropy over the batch, averaged per scored position;
/// gradients are zeroed first and accumulated into the params. A sample with
/// fewer than two target tokens contributes nothing.
double loss_and_gradients(ModelParams& params, const ModelConfig& config,
                          const TrainingBatch& batch);

/// Growing unidirectional encoder state: pushing a token appends one row and
/// leaves every previous encoding unchanged.
struct IncrementalEncoder {
  std::vector<Matrix> layer_inputs;  // input rows of each layer (0..layers-1) plus the stack output
  Matrix encoded;                    // final-normed rows
  int length = 0;
};

IncrementalEncoder incremental_init(const ModelConfig& config);
void incremental_push(const ModelParams& params, const ModelConfig& config,
                      IncrementalEncoder& state, TokenId token);

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const ModelConfig& config, const Vocabulary& vocab);
struct Checkpoint {
  ModelConfig config;
  ModelParams params;
  Vocabulary vocab;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace waitk
