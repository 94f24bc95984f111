#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "deimkit/constants.hpp"
#include "deimkit/matrix.hpp"

namespace deimkit {

/// A = left * diag(sigma) * right^T with orthonormal thin factors,
/// sigma non-increasing, k = min(rows, cols).
struct ThinSvd {
  Matrix left;
  std::vector<double> sigma;
  Matrix right;
};

namespace detail {

// One-sided Jacobi on the columns of g (rows >= cols assumed); accumulates the
// right rotations into v. Row-cyclic sweeps; converged when every off-diagonal
// cosine is below tol::kJacobiCosTol.
inline void one_sided_jacobi(Matrix& g, Matrix& v) {
  const std::size_t n = g.cols();
  for (int sweep = 0; sweep < tol::kJacobiMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto gp = g.col(p);
        auto gq = g.col(q);
        const double app = dot(gp, gp);
        const double aqq = dot(gq, gq);
        const double apq = dot(gp, gq);
        if (app == 0.0 || aqq == 0.0) continue;
        if (std::abs(apq) <= tol::kJacobiCosTol * std::sqrt(app * aqq)) continue;
        rotated = true;
        // Jacobi rotation diagonalizing [[app,apq],[apq,aqq]]
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0)
                             ? 1.0 / (zeta + std::sqrt(1.0 + zeta * zeta))
                             : 1.0 / (zeta - std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < g.rows(); ++i) {
          const double a = gp[i], b = gq[i];
          gp[i] = c * a - s * b;
          gq[i] = s * a + c * b;
        }
        auto vp = v.col(p);
        auto vq = v.col(q);
        for (std::size_t i = 0; i < v.rows(); ++i) {
          const double a = vp[i], b = vq[i];
          vp[i] = c * a - s * b;
          vq[i] = s * a + c * b;
        }
      }
    }
    if (!rotated) break;
  }
}

// Orthonormalize the null-space left vectors against the others: pick
// canonical vectors, Gram-Schmidt, so Z stays orthonormal when sigma_i = 0.
inline void complete_orthonormal(Matrix& z, std::size_t filled) {
  const std::size_t m = z.rows(), k = z.cols();
  std::size_t cand = 0;
  for (std::size_t j = filled; j < k; ++j) {
    for (; cand <= m; ++cand) {
      std::vector<double> w(m, 0.0);
      w[cand % m] = 1.0;
      for (std::size_t l = 0; l < j; ++l) {
        const double pr = dot(z.col(l), std::span<const double>(w));
        auto zl = z.col(l);
        for (std::size_t i = 0; i < m; ++i) w[i] -= pr * zl[i];
      }
      const double nrm = norm2(w);
      if (nrm > 0.5) {  // canonical vector not (nearly) in the span
        auto zj = z.col(j);
        for (std::size_t i = 0; i < m; ++i) zj[i] = w[i] / nrm;
        ++cand;
        break;
      }
    }
  }
}

}  // namespace detail

/// Thin SVD via one-sided Jacobi on the thinner orientation.
inline ThinSvd thin_svd(const Matrix& a) {
  a.require_finite("thin_svd");
  const bool flip = a.rows() < a.cols();
  Matrix g = flip ? transpose(a) : a;
  const std::size_t m = g.rows(), k = g.cols();
  Matrix v = Matrix::identity(k);
  detail::one_sided_jacobi(g, v);

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> nrm(k);
  for (std::size_t j = 0; j < k; ++j) nrm[j] = norm2(g.col(j));
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a_, std::size_t b_) { return nrm[a_] > nrm[b_]; });

  ThinSvd out;
  out.sigma.resize(k);
  out.left = Matrix(m, k);
  out.right = Matrix(k, k);
  std::size_t filled = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t src = order[j];
    out.sigma[j] = nrm[src];
    auto vr = out.right.col(j);
    auto vs = v.col(src);
    std::copy(vs.begin(), vs.end(), vr.begin());
    if (nrm[src] > 0.0) {
      auto zl = out.left.col(j);
      auto gs = g.col(src);
      for (std::size_t i = 0; i < m; ++i) zl[i] = gs[i] / nrm[src];
      filled = j + 1;
    }
  }
  detail::complete_orthonormal(out.left, filled);
  if (flip) std::swap(out.left, out.right);
  return out;
}

/// sigma_min of a square matrix, by thin SVD (used as the exact oracle for
/// the selection condition number c = 1 / sigma_min(S^T U)).
inline double smallest_singular_value(const Matrix& t) {
  if (t.rows() != t.cols()) throw DimensionError("smallest_singular_value: not square");
  return thin_svd(t).sigma.back();
}

}  // namespace deimkit
