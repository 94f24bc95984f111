#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "deimkit/matrix.hpp"
#include "deimkit/matrix_io.hpp"
#include "deimkit/qr.hpp"
#include "deimkit/selection.hpp"
#include "deimkit/svd.hpp"

namespace deimkit {

/// Oblique interpolatory projector f -> M (S^T f), with M = U (S^T U)^{-1}
/// materialized densely and the selected rows of M set to the identity block
/// exactly, so selected entries interpolate bit-for-bit. Immutable after
/// build; apply() is safe to call concurrently.
struct DeimProjector {
  Matrix basis;
  SelectionOperator selection;
  Matrix interp_matrix;  // n x m
  double c = 0.0;        // ||(S^T U)^{-1}||_2
};

/// Assemble M from U and a selection. T = U(sel,:) is factored by unpivoted
/// QR of T^T; the non-selected rows K T^{-1} come from the scaled triangular
/// solve R^{-1} Y = Tunit^{-1} (D^{-1} Y) with D = diag(R); the selected rows
/// are written as the identity block.
inline DeimProjector build_projector(const Matrix& u, const SelectionOperator& sel) {
  u.require_finite("build_projector");
  const std::size_t n = u.rows(), m = u.cols();
  if (sel.indices.size() != m || sel.ambient_dim != n)
    throw DimensionError("build_projector: selection does not match basis");

  Matrix t = extract_rows(u, sel.indices);  // m x m
  PivotedQrFactor f = qr_householder(transpose(t));
  for (std::size_t i = 0; i < m; ++i)
    if (f.r_factor(i, i) == 0.0)
      throw SingularError("build_projector: singular selected block at pivot " +
                              std::to_string(sel.indices[i]),
                          i);

  std::vector<bool> selected(n, false);
  for (std::size_t p : sel.indices) selected[p] = true;
  std::vector<std::size_t> rest;
  rest.reserve(n - m);
  for (std::size_t i = 0; i < n; ++i)
    if (!selected[i]) rest.push_back(i);

  DeimProjector proj;
  proj.basis = u;
  proj.selection = sel;
  proj.interp_matrix = Matrix(n, m);
  for (std::size_t j = 0; j < m; ++j) proj.interp_matrix(sel.indices[j], j) = 1.0;

  if (!rest.empty()) {
    // Y = Q^T K^T, then the scaled back-substitution
    Matrix y = apply_q_transpose(f, transpose(extract_rows(u, rest)));
    const Matrix& r = f.r_factor;
    for (std::size_t j = 0; j < y.cols(); ++j) {
      auto yj = y.col(j);
      for (std::size_t i = 0; i < m; ++i) yj[i] /= r(i, i);
      for (std::size_t i = m; i-- > 0;) {
        double s = yj[i];
        for (std::size_t l = i + 1; l < m; ++l) s -= (r(i, l) / r(i, i)) * yj[l];
        yj[i] = s;
      }
      for (std::size_t i = 0; i < m; ++i) proj.interp_matrix(rest[j], i) = yj[i];
    }
  }

  proj.c = 1.0 / smallest_singular_value(t);
  return proj;
}

/// f_hat = M (S^T f): gather, then one n x m matvec.
inline std::vector<double> apply(const DeimProjector& proj, std::span<const double> f) {
  if (f.size() != proj.basis.rows())
    throw DimensionError("projector apply: wrong vector length");
  std::vector<double> gathered(proj.selection.indices.size());
  for (std::size_t j = 0; j < gathered.size(); ++j)
    gathered[j] = f[proj.selection.indices[j]];
  return matvec(proj.interp_matrix, gathered);
}

struct ErrorSplit {
  double deim_err = 0.0;  // ||f - M S^T f||
  double orth_err = 0.0;  // ||(I - U U^T) f||
  double bound = 0.0;     // c * orth_err
};

inline ErrorSplit error_split(const DeimProjector& proj, std::span<const double> f) {
  const std::vector<double> fhat = apply(proj, f);
  const std::vector<double> coeffs = matvec_transpose(proj.basis, f);
  const std::vector<double> uutf = matvec(proj.basis, coeffs);
  ErrorSplit out;
  double de = 0.0, oe = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d1 = f[i] - fhat[i];
    const double d2 = f[i] - uutf[i];
    de += d1 * d1;
    oe += d2 * d2;
  }
  out.deim_err = std::sqrt(de);
  out.orth_err = std::sqrt(oe);
  out.bound = proj.c * out.orth_err;
  return out;
}

/// Writes basis, indices and M into `dir` (MatrixMarket) plus manifest.json.
inline void export_projector(const DeimProjector& proj, const std::string& dir) {
  write_matrix_market(proj.basis, dir + "/basis.mtx");
  write_matrix_market(proj.interp_matrix, dir + "/interp_matrix.mtx");
  Matrix idx(proj.selection.indices.size(), 1);
  for (std::size_t j = 0; j < proj.selection.indices.size(); ++j)
    idx(j, 0) = static_cast<double>(proj.selection.indices[j] + 1);  // 1-based
  write_matrix_market(idx, dir + "/indices.mtx");
  std::ofstream out(dir + "/manifest.json");
  if (!out) throw IoError("export_projector: cannot write manifest in " + dir);
  out << std::setprecision(17);
  out << "{\n  \"n\": " << proj.basis.rows() << ",\n  \"m\": " << proj.basis.cols()
      << ",\n  \"c\": " << proj.c
      << ",\n  \"files\": [\"basis.mtx\", \"interp_matrix.mtx\", \"indices.mtx\"]\n}\n";
}

}  // namespace deimkit
