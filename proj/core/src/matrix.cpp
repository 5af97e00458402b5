#include "waitk/matrix.hpp"

#include <cmath>

namespace waitk {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw DataError("matmul: shape mismatch");
  Matrix out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      const double v = a.at(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < b.cols; ++j) out.at(i, j) += v * b.at(k, j);
    }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw DataError("matmul_nt: shape mismatch");
  Matrix out(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.rows; ++j) {
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += a.at(i, k) * b.at(j, k);
      out.at(i, j) = s;
    }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) throw DataError("matmul_tn: shape mismatch");
  Matrix out(a.cols, b.cols);
  for (int k = 0; k < a.rows; ++k)
    for (int i = 0; i < a.cols; ++i) {
      const double v = a.at(k, i);
      if (v == 0.0) continue;
      for (int j = 0; j < b.cols; ++j) out.at(i, j) += v * b.at(k, j);
    }
  return out;
}

void add_inplace(Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw DataError("add_inplace: shape mismatch");
  for (std::size_t i = 0; i < a.a.size(); ++i) a.a[i] += b.a[i];
}

void scale_inplace(Matrix& a, double s) {
  for (auto& v : a.a) v *= s;
}

Matrix slice_cols(const Matrix& m, int col0, int count) {
  Matrix out(m.rows, count);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < count; ++j) out.at(i, j) = m.at(i, col0 + j);
  return out;
}

void add_cols_inplace(Matrix& dst, const Matrix& src, int col0) {
  if (dst.rows != src.rows) throw DataError("add_cols_inplace: shape mismatch");
  for (int i = 0; i < src.rows; ++i)
    for (int j = 0; j < src.cols; ++j) dst.at(i, col0 + j) += src.at(i, j);
}

Matrix take_rows(const Matrix& m, int row0, int count) {
  Matrix out(count, m.cols);
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < m.cols; ++j) out.at(i, j) = m.at(row0 + i, j);
  return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw DataError("max_abs_diff: shape mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.a.size(); ++i) d = std::max(d, std::abs(a.a[i] - b.a[i]));
  return d;
}

}  // namespace waitk
