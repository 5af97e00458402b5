#pragma once

#include <functional>
#include <string>
#include <vector>

#include "waitk/masks.hpp"
#include "waitk/matrix.hpp"

namespace waitk {

/// Trainable tensor with its gradient accumulator.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;

  void init(std::string n, int rows, int cols, double scale, Rng& rng) {
    name = std::move(n);
    value = scale == 0.0 ? Matrix(rows, cols) : Matrix::randn(rows, cols, scale, rng);
    grad = Matrix(rows, cols);
  }
  void zero_grad() { grad.fill(0.0); }
};

using ParamVisitor = std::function<void(Param&)>;

// ---- linear -------------------------------------------------------------

/// y = x * w + b with w as (in x out) and b as (1 x out).
Matrix linear_forward(const Matrix& x, const Param& w, const Param& b);

/// Accumulates dw/db and returns dx.
Matrix linear_backward(const Matrix& x, Param& w, Param& b, const Matrix& dy);

// ---- gelu ---------------------------------------------------------------

Matrix gelu_forward(const Matrix& x);
Matrix gelu_backward(const Matrix& x, const Matrix& dy);

// ---- layer norm ---------------------------------------------------------

struct LayerNormCache {
  Matrix xhat;
  std::vector<double> rstd;
};

Matrix layernorm_forward(const Matrix& x, const Param& gain, const Param& bias,
                         LayerNormCache& cache);
Matrix layernorm_backward(Param& gain, Param& bias, const LayerNormCache& cache,
                          const Matrix& dy);

// ---- masked attention ---------------------------------------------------

/// Row-wise softmax restricted to the mask's allowed columns. Disallowed
/// entries get an exact zero weight, so values outside the mask can never leak
/// into the output.
Matrix masked_softmax(const Matrix& scores, const AttentionMask& mask);
Matrix masked_softmax_backward(const Matrix& probs, const Matrix& dprobs,
                               const AttentionMask& mask);

struct AttentionParams {
  Param wq, bq, wk, bk, wv, bv, wo, bo;
  void init(const std::string& prefix, int dim, Rng& rng);
  void visit(const ParamVisitor& fn);
};

struct AttentionCache {
  Matrix q, k, v;                  // projected inputs
  std::vector<Matrix> probs;       // one attention matrix per head
  Matrix context;                  // concatenated head outputs
};

/// Multi-head attention of queries over keys/values under a boolean mask
/// (rows = query positions, cols = key positions, both 1-based).
Matrix attention_forward(const Matrix& x_q, const Matrix& x_kv, const AttentionParams& p,
                         int heads, const AttentionMask& mask, AttentionCache& cache);

struct AttentionGrads {
  Matrix dx_q;
  Matrix dx_kv;
};

AttentionGrads attention_backward(const Matrix& x_q, const Matrix& x_kv, AttentionParams& p,
                                  int heads, const AttentionMask& mask,
                                  const AttentionCache& cache, const Matrix& dy);

// ---- loss ---------------------------------------------------------------

/// Label-smoothed cross entropy over the selected rows of the logit matrix.
/// Targets pair (row, token id). Returns the sum of row losses; d(logits)
/// rows are scaled by grad_scale (the caller divides by its total row count).
double smoothed_cross_entropy(const Matrix& logits,
                              const std::vector<std::pair<int, int>>& targets,
                              double smoothing, Matrix& dlogits, double grad_scale);

/// Row-wise plain softmax (no mask), for emitting output distributions.
Matrix softmax_rows(const Matrix& logits);

// ---- optimizer ----------------------------------------------------------

/// Adam with the warmup-then-inverse-sqrt learning rate shape.
class AdamOptimizer {
 public:
  struct Options {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.98;
    double eps = 1e-9;
    int warmup_steps = 100;
  };

  explicit AdamOptimizer(Options options) : options_(options) {}

  double current_lr() const;
  void step(const std::vector<Param*>& params);

 private:
  struct Slot {
    Matrix m, v;
  };
  Options options_;
  long t_ = 0;
  std::vector<Slot> slots_;
};

}  // namespace waitk
