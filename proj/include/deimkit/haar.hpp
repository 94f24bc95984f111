#pragma once

#include <cstdint>

#include "deimkit/qr.hpp"
#include "deimkit/random.hpp"

namespace deimkit {

/// Random n x m matrix with orthonormal columns, Haar-distributed: thin Q of
/// an i.i.d. standard-normal matrix with the R diagonal signs folded in.
/// Deterministic per seed.
inline Matrix haar_orthonormal(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (m > n) throw DimensionError("haar_orthonormal: m > n");
  Rng rng(seed);
  Matrix g = gaussian_matrix(n, m, rng);
  PivotedQrFactor f = qr_householder(g);
  Matrix q = thin_q(f, m);
  for (std::size_t j = 0; j < m; ++j) {
    if (f.r_factor(j, j) < 0.0) {
      auto qj = q.col(j);
      for (auto& v : qj) v = -v;
    }
  }
  return q;
}

}  // namespace deimkit
