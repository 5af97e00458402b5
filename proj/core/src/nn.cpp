#include "waitk/nn.hpp"

#include <cmath>

namespace waitk {

Matrix linear_forward(const Matrix& x, const Param& w, const Param& b) {
  Matrix y = matmul(x, w.value);
  for (int i = 0; i < y.rows; ++i)
    for (int j = 0; j < y.cols; ++j) y.at(i, j) += b.value.at(0, j);
  return y;
}

Matrix linear_backward(const Matrix& x, Param& w, Param& b, const Matrix& dy) {
  add_inplace(w.grad, matmul_tn(x, dy));
  for (int i = 0; i < dy.rows; ++i)
    for (int j = 0; j < dy.cols; ++j) b.grad.at(0, j) += dy.at(i, j);
  return matmul_nt(dy, w.value);
}

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}  // namespace

Matrix gelu_forward(const Matrix& x) {
  Matrix y = x;
  for (auto& v : y.a) v = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
  return y;
}

Matrix gelu_backward(const Matrix& x, const Matrix& dy) {
  Matrix dx = x;
  for (std::size_t i = 0; i < x.a.size(); ++i) {
    const double v = x.a[i];
    const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
    dx.a[i] = dy.a[i] * (cdf + v * pdf);
  }
  return dx;
}

Matrix layernorm_forward(const Matrix& x, const Param& gain, const Param& bias,
                         LayerNormCache& cache) {
  constexpr double kEps = 1e-5;
  const int d = x.cols;
  cache.xhat = Matrix(x.rows, d);
  cache.rstd.assign(static_cast<std::size_t>(x.rows), 0.0);
  Matrix y(x.rows, d);
  for (int i = 0; i < x.rows; ++i) {
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += x.at(i, j);
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      const double c = x.at(i, j) - mean;
      var += c * c;
    }
    var /= d;
    const double rstd = 1.0 / std::sqrt(var + kEps);
    cache.rstd[static_cast<std::size_t>(i)] = rstd;
    for (int j = 0; j < d; ++j) {
      const double xh = (x.at(i, j) - mean) * rstd;
      cache.xhat.at(i, j) = xh;
      y.at(i, j) = gain.value.at(0, j) * xh + bias.value.at(0, j);
    }
  }
  return y;
}

Matrix layernorm_backward(Param& gain, Param& bias, const LayerNormCache& cache,
                          const Matrix& dy) {
  const int d = dy.cols;
  Matrix dx(dy.rows, d);
  for (int i = 0; i < dy.rows; ++i) {
    double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
    for (int j = 0; j < d; ++j) {
      const double dxh = dy.at(i, j) * gain.value.at(0, j);
      mean_dxhat += dxh;
      mean_dxhat_xhat += dxh * cache.xhat.at(i, j);
      gain.grad.at(0, j) += dy.at(i, j) * cache.xhat.at(i, j);
      bias.grad.at(0, j) += dy.at(i, j);
    }
    mean_dxhat /= d;
    mean_dxhat_xhat /= d;
    const double rstd = cache.rstd[static_cast<std::size_t>(i)];
    for (int j = 0; j < d; ++j) {
      const double dxh = dy.at(i, j) * gain.value.at(0, j);
      dx.at(i, j) = rstd * (dxh - mean_dxhat - cache.xhat.at(i, j) * mean_dxhat_xhat);
    }
  }
  return dx;
}

Matrix masked_softmax(const Matrix& scores, const AttentionMask& mask) {
  if (mask.rows() != scores.rows || mask.cols() != scores.cols)
    throw DataError("masked_softmax: mask shape mismatch");
  Matrix probs(scores.rows, scores.cols);
  for (int i = 0; i < scores.rows; ++i) {
    double best = -1e300;
    bool any = false;
    for (int j = 0; j < scores.cols; ++j) {
      if (!mask.allowed(i + 1, j + 1)) continue;
      any = true;
      best = std::max(best, scores.at(i, j));
    }
    if (!any) throw DataError("masked_softmax: row with no allowed columns");
    double sum = 0.0;
    for (int j = 0; j < scores.cols; ++j) {
      if (!mask.allowed(i + 1, j + 1)) continue;
      const double e = std::exp(scores.at(i, j) - best);
      probs.at(i, j) = e;
      sum += e;
    }
    for (int j = 0; j < scores.cols; ++j)
      if (mask.allowed(i + 1, j + 1)) probs.at(i, j) /= sum;
  }
  return probs;
}

Matrix masked_softmax_backward(const Matrix& probs, const Matrix& dprobs,
                               const AttentionMask& mask) {
  Matrix dscores(probs.rows, probs.cols);
  for (int i = 0; i < probs.rows; ++i) {
    double dot = 0.0;
    for (int j = 0; j < probs.cols; ++j)
      if (mask.allowed(i + 1, j + 1)) dot += probs.at(i, j) * dprobs.at(i, j);
    for (int j = 0; j < probs.cols; ++j)
      if (mask.allowed(i + 1, j + 1))
        dscores.at(i, j) = probs.at(i, j) * (dprobs.at(i, j) - dot);
  }
  return dscores;
}

void AttentionParams::init(const std::string& prefix, int dim, Rng& rng) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  wq.init(prefix + ".wq", dim, dim, scale, rng);
  bq.init(prefix + ".bq", 1, dim, 0.0, rng);
  wk.init(prefix + ".wk", dim, dim, scale, rng);
  bk.init(prefix + ".bk", 1, dim, 0.0, rng);
  wv.init(prefix + ".wv", dim, dim, scale, rng);
  bv.init(prefix + ".bv", 1, dim, 0.0, rng);
  wo.init(prefix + ".wo", dim, dim, scale, rng);
  bo.init(prefix + ".bo", 1, dim, 0.0, rng);
}

void AttentionParams::visit(const ParamVisitor& fn) {
  for (Param* p : {&wq, &bq, &wk, &bk, &wv, &bv, &wo, &bo}) fn(*p);
}

Matrix attention_forward(const Matrix& x_q, const Matrix& x_kv, const AttentionParams& p,
                         int heads, const AttentionMask& mask, AttentionCache& cache) {
  const int dim = x_q.cols;
  if (dim % heads != 0) throw ConfigError("attention: dim must divide by heads");
  const int dh = dim / heads;
  const double alpha = 1.0 / std::sqrt(static_cast<double>(dh));

  cache.q = linear_forward(x_q, p.wq, p.bq);
  cache.k = linear_forward(x_kv, p.wk, p.bk);
  cache.v = linear_forward(x_kv, p.wv, p.bv);
  cache.probs.clear();
  cache.context = Matrix(x_q.rows, dim);

  for (int h = 0; h < heads; ++h) {
    const Matrix qh = slice_cols(cache.q, h * dh, dh);
    const Matrix kh = slice_cols(cache.k, h * dh, dh);
    const Matrix vh = slice_cols(cache.v, h * dh, dh);
    Matrix scores = matmul_nt(qh, kh);
    scale_inplace(scores, alpha);
    Matrix probs = masked_softmax(scores, mask);
    const Matrix ctx = matmul(probs, vh);
    add_cols_inplace(cache.context, ctx, h * dh);
    cache.probs.push_back(std::move(probs));
  }
  return linear_forward(cache.context, p.wo, p.bo);
}

AttentionGrads attention_backward(const Matrix& x_q, const Matrix& x_kv, AttentionParams& p,
                                  int heads, const AttentionMask& mask,
                                  const AttentionCache& cache, const Matrix& dy) {
  const int dim = x_q.cols;
  const int dh = dim / heads;
  const double alpha = 1.0 / std::sqrt(static_cast<double>(dh));

  const Matrix dcontext = linear_backward(cache.context, p.wo, p.bo, dy);

  Matrix dq(cache.q.rows, dim), dk(cache.k.rows, dim), dv(cache.v.rows, dim);
  for (int h = 0; h < heads; ++h) {
    const Matrix qh = slice_cols(cache.q, h * dh, dh);
    const Matrix kh = slice_cols(cache.k, h * dh, dh);
    const Matrix vh = slice_cols(cache.v, h * dh, dh);
    const Matrix dctx = slice_cols(dcontext, h * dh, dh);
    const Matrix& probs = cache.probs[static_cast<std::size_t>(h)];

    const Matrix dprobs = matmul_nt(dctx, vh);
    Matrix dvh = matmul_tn(probs, dctx);
    Matrix dscores = masked_softmax_backward(probs, dprobs, mask);
    scale_inplace(dscores, alpha);
    Matrix dqh = matmul(dscores, kh);
    Matrix dkh = matmul_tn(dscores, qh);

    add_cols_inplace(dq, dqh, h * dh);
    add_cols_inplace(dk, dkh, h * dh);
    add_cols_inplace(dv, dvh, h * dh);
  }

  AttentionGrads grads;
  grads.dx_q = linear_backward(x_q, p.wq, p.bq, dq);
  grads.dx_kv = linear_backward(x_kv, p.wk, p.bk, dk);
  add_inplace(grads.dx_kv, linear_backward(x_kv, p.wv, p.bv, dv));
  return grads;
}

double smoothed_cross_entropy(const Matrix& logits,
                              const std::vector<std::pair<int, int>>& targets,
                              double smoothing, Matrix& dlogits, double grad_scale) {
  dlogits = Matrix(logits.rows, logits.cols);
  if (targets.empty()) return 0.0;
  const int vocab = logits.cols;
  double total = 0.0;
  for (const auto& [row, tok] : targets) {
    double best = -1e300;
    for (int j = 0; j < vocab; ++j) best = std::max(best, logits.at(row, j));
    double sum = 0.0;
    for (int j = 0; j < vocab; ++j) sum += std::exp(logits.at(row, j) - best);
    const double logz = std::log(sum) + best;
    double loss = 0.0;
    for (int j = 0; j < vocab; ++j) {
      const double logp = logits.at(row, j) - logz;
      const double q = (j == tok ? 1.0 - smoothing : 0.0) + smoothing / vocab;
      loss -= q * logp;
      dlogits.at(row, j) += (std::exp(logp) - q) * grad_scale;
    }
    total += loss;
  }
  return total;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix probs(logits.rows, logits.cols);
  for (int i = 0; i < logits.rows; ++i) {
    double best = -1e300;
    for (int j = 0; j < logits.cols; ++j) best = std::max(best, logits.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < logits.cols; ++j) {
      const double e = std::exp(logits.at(i, j) - best);
      probs.at(i, j) = e;
      sum += e;
    }
    for (int j = 0; j < logits.cols; ++j) probs.at(i, j) /= sum;
  }
  return probs;
}

double AdamOptimizer::current_lr() const {
  const long t = std::max(t_, 1L);
  const double w = static_cast<double>(options_.warmup_steps);
  if (t <= options_.warmup_steps) return options_.lr * static_cast<double>(t) / w;
  return options_.lr * std::sqrt(w / static_cast<double>(t));
}

void AdamOptimizer::step(const std::vector<Param*>& params) {
  if (slots_.empty()) {
    slots_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      slots_[i].m = Matrix(params[i]->value.rows, params[i]->value.cols);
      slots_[i].v = Matrix(params[i]->value.rows, params[i]->value.cols);
    }
  }
  if (slots_.size() != params.size()) throw ConfigError("AdamOptimizer: parameter set changed");
  ++t_;
  const double lr = current_lr();
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = *params[i];
    Slot& s = slots_[i];
    for (std::size_t j = 0; j < p.value.a.size(); ++j) {
      const double g = p.grad.a[j];
      s.m.a[j] = b1 * s.m.a[j] + (1.0 - b1) * g;
      s.v.a[j] = b2 * s.v.a[j] + (1.0 - b2) * g * g;
      const double mhat = s.m.a[j] / bc1;
      const double vhat = s.v.a[j] / bc2;
      p.value.a[j] -= lr * mhat / (std::sqrt(vhat) + options_.eps);
    }
  }
}

}  // namespace waitk
