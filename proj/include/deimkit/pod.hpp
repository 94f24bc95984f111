#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "deimkit/matrix.hpp"
#include "deimkit/svd.hpp"

namespace deimkit {

/// Snapshots as columns, with the sampling coordinate (time or parameter) of
/// each column alongside.
struct SnapshotSet {
  Matrix matrix;
  std::vector<double> coords;
};

struct PodBasis {
  Matrix vectors;                       // n x rank_used, orthonormal
  std::vector<double> singular_values;  // full spectrum, non-increasing
  std::size_t rank_used = 0;
};

namespace detail {

inline PodBasis truncate_svd(ThinSvd svd, std::size_t r) {
  PodBasis basis;
  basis.singular_values = svd.sigma;
  basis.rank_used = r;
  basis.vectors = Matrix(svd.left.rows(), r);
  for (std::size_t j = 0; j < r; ++j) {
    auto src = svd.left.col(j);
    auto dst = basis.vectors.col(j);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return basis;
}

}  // namespace detail

/// Leading-`rank` left singular vectors of the snapshot matrix.
inline PodBasis pod_basis(const SnapshotSet& snaps, std::size_t rank) {
  const std::size_t kmax = std::min(snaps.matrix.rows(), snaps.matrix.cols());
  if (rank == 0 || rank > kmax) throw DimensionError("pod_basis: rank out of range");
  return detail::truncate_svd(thin_svd(snaps.matrix), rank);
}

/// Smallest r with tail energy sum_{i>r} sigma_i^2 <= tol^2 * sum sigma_i^2.
inline PodBasis pod_basis_energy(const SnapshotSet& snaps, double energy_tol) {
  if (!(energy_tol > 0.0 && energy_tol < 1.0))
    throw DimensionError("pod_basis_energy: tol must be in (0,1)");
  ThinSvd svd = thin_svd(snaps.matrix);
  double total = 0.0;
  for (double s : svd.sigma) total += s * s;
  double tail = total;
  std::size_t r = svd.sigma.size();
  for (std::size_t i = 0; i < svd.sigma.size(); ++i) {
    tail -= svd.sigma[i] * svd.sigma[i];
    if (tail <= energy_tol * energy_tol * total) {
      r = i + 1;
      break;
    }
  }
  if (r == 0) r = 1;
  return detail::truncate_svd(std::move(svd), r);
}

/// ||X - V * reduced||_F / ||X||_F
inline double reconstruction_error(const SnapshotSet& snaps, const Matrix& v,
                                   const Matrix& reduced_snaps) {
  if (v.cols() != reduced_snaps.rows() || v.rows() != snaps.matrix.rows() ||
      reduced_snaps.cols() != snaps.matrix.cols())
    throw DimensionError("reconstruction_error: dimension mismatch");
  const Matrix approx = v * reduced_snaps;
  double num = 0.0, den = 0.0;
  for (std::size_t idx = 0; idx < approx.data().size(); ++idx) {
    const double d = snaps.matrix.data()[idx] - approx.data()[idx];
    num += d * d;
    den += snaps.matrix.data()[idx] * snaps.matrix.data()[idx];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

struct RowwiseErrors {
  std::vector<double> values;       // relative where the row has mass, else absolute
  std::vector<bool> zero_row;      // true where the reference row norm is zero
};

/// Per-row 2-norm errors ||X(k,:) - Xhat(k,:)|| / ||X(k,:)||. Zero-norm rows
/// report the absolute error and are flagged.
inline RowwiseErrors rowwise_relative_errors(const Matrix& x, const Matrix& xhat) {
  if (x.rows() != xhat.rows() || x.cols() != xhat.cols())
    throw DimensionError("rowwise_relative_errors: shape mismatch");
  RowwiseErrors out;
  out.values.resize(x.rows());
  out.zero_row.assign(x.rows(), false);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double err = 0.0, ref = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double d = x(i, j) - xhat(i, j);
      err += d * d;
      ref += x(i, j) * x(i, j);
    }
    if (ref == 0.0) {
      out.values[i] = std::sqrt(err);
      out.zero_row[i] = true;
    } else {
      out.values[i] = std::sqrt(err / ref);
    }
  }
  return out;
}

}  // namespace deimkit
