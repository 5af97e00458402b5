#pragma once

#include <vector>

#include "waitk/rng.hpp"
#include "waitk/text.hpp"

namespace waitk {

/// Dense row-major matrix of doubles. Small sizes only; everything in the toy
/// model stack is written against this type.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

  std::size_t size() const { return a.size(); }
  void fill(double v) { std::fill(a.begin(), a.end(), v); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

  static Matrix randn(int r, int c, double scale, Rng& rng) {
    Matrix m(r, c);
    for (auto& v : m.a) v = scale * rng.normal();
    return m;
  }
};

Matrix matmul(const Matrix& a, const Matrix& b);            // a(m,k) * b(k,n)
Matrix matmul_nt(const Matrix& a, const Matrix& b);         // a(m,k) * b(n,k)^T
Matrix matmul_tn(const Matrix& a, const Matrix& b);         // a(k,m)^T * b(k,n)
void add_inplace(Matrix& a, const Matrix& b);
void scale_inplace(Matrix& a, double s);
Matrix slice_cols(const Matrix& m, int col0, int count);
void add_cols_inplace(Matrix& dst, const Matrix& src, int col0);  // dst[:, col0..] += src
Matrix take_rows(const Matrix& m, int row0, int count);
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace waitk
