#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "deimkit/errors.hpp"

namespace deimkit {

/// Incremental condition estimation for a growing upper-triangular T.
/// Maintains a unit-norm direction d and the solution z of T^T z = d chosen to
/// make gamma = ||z|| large; gamma is a lower bound on ||T^{-1}||_2 and never
/// decreases as columns are appended. O(j) work per append.
struct IceState {
  std::size_t dim = 0;
  std::vector<double> direction;  // d, unit norm
  std::vector<double> solution;   // z, T^T z = d
  double gamma = 0.0;
};

/// Append the next column of T: `new_column` holds the entries above the
/// diagonal (length state.dim), `new_diag` the new diagonal entry. The new
/// direction (s*d, c) is chosen to maximize the estimate over all s^2+c^2=1,
/// via the closed-form eigenpair of the induced 2x2 form.
inline IceState ice_append(const IceState& state, std::span<const double> new_column,
                           double new_diag) {
  if (new_diag == 0.0)
    throw SingularError("ice_append: zero diagonal growth", state.dim);
  if (new_column.size() != state.dim)
    throw DimensionError("ice_append: column length != current dim");

  IceState next;
  next.dim = state.dim + 1;
  if (state.dim == 0) {
    next.direction = {1.0};
    next.solution = {1.0 / new_diag};
    next.gamma = std::abs(1.0 / new_diag);
    return next;
  }

  double alpha = 0.0;
  for (std::size_t i = 0; i < state.dim; ++i) alpha += new_column[i] * state.solution[i];
  const double d2 = new_diag * new_diag;
  // ||z(s,c)||^2 = (s,c) B (s,c)^T
  const double b11 = state.gamma * state.gamma + alpha * alpha / d2;
  const double b12 = -alpha / d2;
  const double b22 = 1.0 / d2;
  const double half_tr = 0.5 * (b11 + b22);
  const double disc = std::sqrt(0.25 * (b11 - b22) * (b11 - b22) + b12 * b12);
  const double lambda = half_tr + disc;
  double s, c;
  if (b12 == 0.0) {
    s = (b11 >= b22) ? 1.0 : 0.0;
    c = (b11 >= b22) ? 0.0 : 1.0;
  } else {
    // eigenvector of [[b11,b12],[b12,b22]] for lambda; pick the better-scaled form
    double vx, vy;
    if (std::abs(lambda - b11) > std::abs(lambda - b22)) {
      vx = b12;
      vy = lambda - b11;
    } else {
      vx = lambda - b22;
      vy = b12;
    }
    const double nrm = std::sqrt(vx * vx + vy * vy);
    s = vx / nrm;
    c = vy / nrm;
  }

  next.direction.resize(next.dim);
  next.solution.resize(next.dim);
  for (std::size_t i = 0; i < state.dim; ++i) {
    next.direction[i] = s * state.direction[i];
    next.solution[i] = s * state.solution[i];
  }
  next.direction[state.dim] = c;
  next.solution[state.dim] = (c - s * alpha) / new_diag;
  next.gamma = std::sqrt(lambda);
  return next;
}

}  // namespace deimkit
