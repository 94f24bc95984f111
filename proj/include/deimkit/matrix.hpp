#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "deimkit/errors.hpp"

namespace deimkit {

/// Dense real matrix, column-major.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const {
    return {data_.data() + j * rows_, rows_};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  void require_finite(const char* what) const {
    if (!all_finite()) throw NonFiniteError(std::string(what) + ": non-finite entries");
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
  return t;
}

/// C = A * B, axpy-based inner kernel (streams columns).
inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: dimension mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto cj = c.col(j);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double bkj = b(k, j);
      if (bkj == 0.0) continue;
      auto ak = a.col(k);
      for (std::size_t i = 0; i < a.rows(); ++i) cj[i] += ak[i] * bkj;
    }
  }
  return c;
}

/// A^T * B without forming the transpose.
inline Matrix multiply_at_b(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("multiply_at_b: dimension mismatch");
  Matrix c(a.cols(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto bj = b.col(j);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      auto ai = a.col(i);
      double s = 0.0;
      for (std::size_t k = 0; k < a.rows(); ++k) s += ai[k] * bj[k];
      c(i, j) = s;
    }
  }
  return c;
}

/// y = A * x
inline std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DimensionError("matvec: dimension mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t k = 0; k < a.cols(); ++k) {
    const double xk = x[k];
    if (xk == 0.0) continue;
    auto ak = a.col(k);
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] += ak[i] * xk;
  }
  return y;
}

/// y = A^T * x
inline std::vector<double> matvec_transpose(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) throw DimensionError("matvec_transpose: dimension mismatch");
  std::vector<double> y(a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    auto aj = a.col(j);
    double s = 0.0;
    for (std::size_t k = 0; k < a.rows(); ++k) s += aj[k] * x[k];
    y[j] = s;
  }
  return y;
}

inline double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

inline double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

inline double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

/// Rows of `a` listed in `rows`, in order.
inline Matrix extract_rows(const Matrix& a, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < rows.size(); ++i) out(i, j) = a(rows[i], j);
  return out;
}

inline Matrix extract_cols(const Matrix& a, std::span<const std::size_t> cols) {
  Matrix out(a.rows(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    auto src = a.col(cols[j]);
    auto dst = out.col(j);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return out;
}

}  // namespace deimkit
