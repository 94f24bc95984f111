#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "deimkit/constants.hpp"
#include "deimkit/matrix.hpp"

namespace deimkit {

/// Householder QR factorization, optionally with Businger-Golub column
/// pivoting. Q is held implicitly as a sequence of reflectors
/// H_i = I - tau_i v_i v_i^T acting on rows i..m-1, with v_i[0] = 1.
struct PivotedQrFactor {
  struct Reflector {
    std::vector<double> v;  // length m - i, v[0] == 1
    double tau = 0.0;
  };
  std::vector<Reflector> reflectors;
  Matrix r_factor;                 // m x n upper-trapezoidal
  std::vector<std::size_t> perm;   // perm[j] = original index of column now at j
  std::vector<double> diag_abs;    // |R_ii|, i = 0..min(m,n)-1
};

namespace detail {

// Smallest index whose column norm is within the relative tie window of the max.
inline std::size_t pick_pivot(const std::vector<double>& colnorm2, std::size_t from,
                              std::size_t to) {
  double best = 0.0;
  for (std::size_t j = from; j < to; ++j) best = std::max(best, colnorm2[j]);
  const double cutoff = best * (1.0 - 2.0 * tol::kPivotTieRel);
  for (std::size_t j = from; j < to; ++j)
    if (colnorm2[j] >= cutoff) return j;
  return from;
}

// Reflector annihilating x[1:] ; returns (alpha, v, tau) with H x = alpha e_1.
inline double make_reflector(std::span<const double> x, std::vector<double>& v,
                             double& tau) {
  const std::size_t len = x.size();
  v.assign(x.begin(), x.end());
  double nrm = norm2(x);
  if (nrm == 0.0 || len == 1) {
    tau = 0.0;
    v.assign(len, 0.0);
    if (!v.empty()) v[0] = 1.0;
    return len ? x[0] : 0.0;
  }
  const double alpha = (x[0] >= 0.0) ? -nrm : nrm;
  v[0] -= alpha;
  const double v0 = v[0];
  for (auto& vi : v) vi /= v0;
  tau = -v0 / alpha;  // = 2 / (v^T v) with v[0] = 1 scaling
  return alpha;
}

// Apply H = I - tau v v^T to x (in place), x and v of equal length.
inline void apply_reflector(std::span<const double> v, double tau, std::span<double> x) {
  if (tau == 0.0) return;
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * x[i];
  s *= tau;
  for (std::size_t i = 0; i < v.size(); ++i) x[i] -= s * v[i];
}

inline PivotedQrFactor householder_qr(const Matrix& a, bool pivot) {
  a.require_finite("qr");
  const std::size_t m = a.rows(), n = a.cols();
  const std::size_t k = std::min(m, n);
  PivotedQrFactor f;
  f.r_factor = a;
  f.perm.resize(n);
  std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
  Matrix& r = f.r_factor;

  std::vector<double> colnorm2(n), orig2(n);
  if (pivot) {
    for (std::size_t j = 0; j < n; ++j) {
      auto cj = r.col(j);
      colnorm2[j] = dot(cj, cj);
      orig2[j] = colnorm2[j];
    }
  }

  std::vector<double> scratch;
  for (std::size_t i = 0; i < k; ++i) {
    if (pivot) {
      const std::size_t p = pick_pivot(colnorm2, i, n);
      if (p != i) {
        for (std::size_t row = 0; row < m; ++row) std::swap(r(row, i), r(row, p));
        std::swap(f.perm[i], f.perm[p]);
        std::swap(colnorm2[i], colnorm2[p]);
        std::swap(orig2[i], orig2[p]);
      }
    }
    PivotedQrFactor::Reflector h;
    scratch.assign(r.col(i).begin() + i, r.col(i).end());
    const double alpha = make_reflector(scratch, h.v, h.tau);
    r(i, i) = alpha;
    for (std::size_t row = i + 1; row < m; ++row) r(row, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      auto cj = r.col(j);
      apply_reflector(h.v, h.tau, cj.subspan(i));
      if (pivot) {
        // downdate with exact recomputation once cancellation bites
        colnorm2[j] -= cj[i] * cj[i];
        if (colnorm2[j] < tol::kDowndateGuardRel * orig2[j] || colnorm2[j] < 0.0) {
          double s = 0.0;
          for (std::size_t row = i + 1; row < m; ++row) s += cj[row] * cj[row];
          colnorm2[j] = s;
          orig2[j] = s;
        }
      }
    }
    f.diag_abs.push_back(std::abs(alpha));
    f.reflectors.push_back(std::move(h));
  }
  return f;
}

}  // namespace detail

/// QR with Businger-Golub column pivoting: A Pi = Q R, pivot magnitudes
/// monotonically non-increasing.
inline PivotedQrFactor qr_column_pivoted(const Matrix& a) {
  return detail::householder_qr(a, true);
}

/// Plain (unpivoted) Householder QR.
inline PivotedQrFactor qr_householder(const Matrix& a) {
  return detail::householder_qr(a, false);
}

/// B <- Q * B
inline Matrix apply_q(const PivotedQrFactor& f, Matrix b) {
  for (std::size_t i = f.reflectors.size(); i-- > 0;) {
    const auto& h = f.reflectors[i];
    for (std::size_t j = 0; j < b.cols(); ++j)
      detail::apply_reflector(h.v, h.tau, b.col(j).subspan(i));
  }
  return b;
}

/// B <- Q^T * B
inline Matrix apply_q_transpose(const PivotedQrFactor& f, Matrix b) {
  for (std::size_t i = 0; i < f.reflectors.size(); ++i) {
    const auto& h = f.reflectors[i];
    for (std::size_t j = 0; j < b.cols(); ++j)
      detail::apply_reflector(h.v, h.tau, b.col(j).subspan(i));
  }
  return b;
}

/// Leading `cols` columns of Q, explicitly formed (m x cols).
inline Matrix thin_q(const PivotedQrFactor& f, std::size_t cols) {
  const std::size_t m = f.r_factor.rows();
  Matrix e(m, cols);
  for (std::size_t j = 0; j < cols; ++j) e(j, j) = 1.0;
  return apply_q(f, std::move(e));
}

/// Back-substitution, column by column. T must be square upper-triangular with
/// nonzero diagonal.
inline Matrix solve_upper_triangular(const Matrix& t, const Matrix& b) {
  const std::size_t m = t.rows();
  if (t.cols() != m || b.rows() != m)
    throw DimensionError("solve_upper_triangular: dimension mismatch");
  for (std::size_t i = 0; i < m; ++i)
    if (t(i, i) == 0.0)
      throw SingularError("solve_upper_triangular: zero diagonal", i);
  Matrix x = b;
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto xj = x.col(j);
    for (std::size_t i = m; i-- > 0;) {
      double s = xj[i];
      for (std::size_t l = i + 1; l < m; ++l) s -= t(i, l) * xj[l];
      xj[i] = s / t(i, i);
    }
  }
  return x;
}

}  // namespace deimkit
