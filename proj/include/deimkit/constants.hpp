#pragma once

#include <limits>

// Central place for the numerical tolerances used across the library.
namespace deimkit::tol {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

// QR with column pivoting
inline constexpr double kPivotTieRel = 1e-13;   // relative tie window for pivot selection
inline constexpr double kDowndateGuardRel = kEps;  // recompute when colnorm^2 < kEps * original^2

// One-sided Jacobi SVD
inline constexpr double kJacobiCosTol = 1e-14;
inline constexpr int kJacobiMaxSweeps = 30;

// Orthonormality checks
inline constexpr double kOrthoTol = 1e-10;

}  // namespace deimkit::tol
