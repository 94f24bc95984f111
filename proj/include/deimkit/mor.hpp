#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "deimkit/matrix.hpp"
#include "deimkit/pod.hpp"
#include "deimkit/projector.hpp"

namespace deimkit {

/// E x' = A x + f(x) + B g(t). The nonlinearity is componentwise: component i
/// reads the state entries listed in pattern[i] (in that order) and returns a
/// scalar, so reduced evaluation can touch only what it needs.
struct FomModel {
  std::size_t dim = 0;
  std::vector<double> mass_diag;  // E (diagonal)
  Matrix lin;                     // A, dense; empty or all-zero skips the solve
  Matrix input_map;               // B, n x nu
  std::function<std::vector<double>(double)> forcing;  // g(t), length nu
  std::vector<std::vector<std::size_t>> pattern;
  std::function<double(std::size_t, std::span<const double>)> nonlin;
};

struct IntegrationError : Error {
  IntegrationError(const std::string& what, double t) : Error(what), time(t) {}
  double time = 0.0;
};

namespace detail {

// Dense LU with partial pivoting, factored once and solved per step.
class LuSolver {
 public:
  LuSolver() = default;
  explicit LuSolver(Matrix a) : lu_(std::move(a)), piv_(lu_.rows()) {
    const std::size_t n = lu_.rows();
    if (lu_.cols() != n) throw DimensionError("LuSolver: not square");
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t p = j;
      for (std::size_t i = j + 1; i < n; ++i)
        if (std::abs(lu_(i, j)) > std::abs(lu_(p, j))) p = i;
      piv_[j] = p;
      if (lu_(p, j) == 0.0) throw SingularError("LuSolver: singular matrix", j);
      if (p != j)
        for (std::size_t l = 0; l < n; ++l) std::swap(lu_(j, l), lu_(p, l));
      const double d = lu_(j, j);
      for (std::size_t i = j + 1; i < n; ++i) {
        lu_(i, j) /= d;
        const double f = lu_(i, j);
        if (f == 0.0) continue;
        for (std::size_t l = j + 1; l < n; ++l) lu_(i, l) -= f * lu_(j, l);
      }
    }
  }

  void solve_in_place(std::vector<double>& b) const {
    const std::size_t n = lu_.rows();
    for (std::size_t j = 0; j < n; ++j)
      if (piv_[j] != j) std::swap(b[j], b[piv_[j]]);
    for (std::size_t j = 0; j < n; ++j) {
      const double bj = b[j];
      if (bj == 0.0) continue;
      for (std::size_t i = j + 1; i < n; ++i) b[i] -= lu_(i, j) * bj;
    }
    for (std::size_t j = n; j-- > 0;) {
      b[j] /= lu_(j, j);
      const double bj = b[j];
      if (bj == 0.0) continue;
      for (std::size_t i = 0; i < j; ++i) b[i] -= lu_(i, j) * bj;
    }
  }

 private:
  Matrix lu_;
  std::vector<std::size_t> piv_;
};

inline bool is_all_zero(const Matrix& a) {
  for (double v : a.data())
    if (v != 0.0) return false;
  return true;
}

// full f(x), using the declared pattern
inline void eval_nonlinearity(const FomModel& model, std::span<const double> x,
                              std::vector<double>& out) {
  out.assign(model.dim, 0.0);
  if (!model.nonlin) return;
  std::vector<double> reads;
  for (std::size_t i = 0; i < model.dim; ++i) {
    const auto& pat = model.pattern[i];
    reads.resize(pat.size());
    for (std::size_t k = 0; k < pat.size(); ++k) reads[k] = x[pat[k]];
    out[i] = model.nonlin(i, reads);
  }
}

}  // namespace detail

/// Galerkin-projected model. When `deim` is set, the nonlinear term is
/// evaluated through the sampled rows only (see reduced_nonlinear_eval);
/// otherwise the nonlinearity is lifted exactly (O(n) per step).
struct ReducedModel {
  Matrix basis;  // V, n x r
  std::vector<double> mass_diag_full;
  Matrix mass_r, lin_r, input_r;
  bool lin_zero = false;
  std::function<std::vector<double>(double)> forcing;
  std::vector<std::vector<std::size_t>> pattern;
  std::function<double(std::size_t, std::span<const double>)> nonlin;

  std::optional<DeimProjector> deim;
  Matrix premultiplier;                        // V^T U (S^T U)^{-1}, r x m
  std::vector<std::size_t> sampled_rows;       // union of reads of selected comps
  Matrix v_sampled;                            // those rows of V
  std::vector<std::vector<std::size_t>> read_pos;  // per selected comp -> rows of v_sampled
};

inline ReducedModel galerkin_reduce(const FomModel& fom, const Matrix& v,
                                    std::optional<DeimProjector> deim = std::nullopt) {
  const std::size_t n = fom.dim, r = v.cols();
  if (v.rows() != n) throw DimensionError("galerkin_reduce: basis rows != model dim");
  Matrix gram = multiply_at_b(v, v);
  for (std::size_t i = 0; i < r; ++i) gram(i, i) -= 1.0;
  if (max_abs(gram) > tol::kOrthoTol)
    throw DimensionError("galerkin_reduce: basis columns not orthonormal");

  ReducedModel rom;
  rom.basis = v;
  rom.mass_diag_full = fom.mass_diag;
  rom.forcing = fom.forcing;
  rom.pattern = fom.pattern;
  rom.nonlin = fom.nonlin;

  Matrix ev(n, r);  // E V
  for (std::size_t j = 0; j < r; ++j) {
    auto src = v.col(j);
    auto dst = ev.col(j);
    for (std::size_t i = 0; i < n; ++i) dst[i] = fom.mass_diag[i] * src[i];
  }
  rom.mass_r = multiply_at_b(v, ev);
  rom.lin_zero = fom.lin.rows() == 0 || detail::is_all_zero(fom.lin);
  rom.lin_r = rom.lin_zero ? Matrix(r, r) : multiply_at_b(v, fom.lin * v);
  rom.input_r = multiply_at_b(v, fom.input_map);

  if (deim) {
    if (deim->basis.rows() != n)
      throw DimensionError("galerkin_reduce: projector dimension mismatch");
    rom.premultiplier = multiply_at_b(v, deim->interp_matrix);
    std::vector<std::size_t> rows;
    for (std::size_t p : deim->selection.indices)
      for (std::size_t g : fom.pattern[p]) rows.push_back(g);
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    rom.sampled_rows = rows;
    rom.v_sampled = extract_rows(v, rows);
    rom.read_pos.reserve(deim->selection.indices.size());
    for (std::size_t p : deim->selection.indices) {
      std::vector<std::size_t> pos;
      pos.reserve(fom.pattern[p].size());
      for (std::size_t g : fom.pattern[p]) {
        const auto it = std::lower_bound(rows.begin(), rows.end(), g);
        pos.push_back(static_cast<std::size_t>(it - rows.begin()));
      }
      rom.read_pos.push_back(std::move(pos));
    }
    rom.deim = std::move(deim);
  }
  return rom;
}

/// V^T U (S^T U)^{-1} S^T f(V x_r), evaluating only the selected components of
/// f at the entries of V x_r they read. No length-n temporaries.
inline std::vector<double> reduced_nonlinear_eval(const ReducedModel& rom,
                                                  std::span<const double> x_r) {
  if (!rom.deim) throw DimensionError("reduced_nonlinear_eval: model has no sampling");
  const std::size_t m = rom.deim->selection.indices.size();
  // x at the sampled rows
  std::vector<double> xs(rom.sampled_rows.size(), 0.0);
  for (std::size_t j = 0; j < rom.v_sampled.cols(); ++j) {
    const double xj = x_r[j];
    if (xj == 0.0) continue;
    auto cj = rom.v_sampled.col(j);
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] += cj[i] * xj;
  }
  std::vector<double> fvals(m), reads;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t comp = rom.deim->selection.indices[k];
    const auto& pos = rom.read_pos[k];
    reads.resize(pos.size());
    for (std::size_t l = 0; l < pos.size(); ++l) reads[l] = xs[pos[l]];
    fvals[k] = rom.nonlin(comp, reads);
  }
  return matvec(rom.premultiplier, fvals);
}

/// FitzHugh-Nagumo on [0,1]: eps v_t = eps^2 v_xx + v(v-0.1)(1-v) - w + c,
/// w_t = b v - gamma w + c, Neumann ends with v_x(0,t) = -i0(t) injected via a
/// ghost node. States ordered (v_1..v_h, w_1..w_h), n = 2 n_half.
inline FomModel build_fn_model(std::size_t n_half) {
  if (n_half < 8) throw DimensionError("build_fn_model: n_half < 8");
  const double eps = 0.015, b = 0.5, gamma = 2.0, c = 0.05;
  const double h = 1.0 / static_cast<double>(n_half - 1);
  const std::size_t n = 2 * n_half;

  FomModel fom;
  fom.dim = n;
  fom.mass_diag.assign(n, 1.0);
  for (std::size_t i = 0; i < n_half; ++i) fom.mass_diag[i] = eps;

  fom.lin = Matrix(n, n);
  const double d = eps * eps / (h * h);
  for (std::size_t i = 0; i < n_half; ++i) {
    fom.lin(i, i) = -2.0 * d;
    if (i > 0) fom.lin(i, i - 1) = d;
    if (i + 1 < n_half) fom.lin(i, i + 1) = d;
    fom.lin(i, n_half + i) = -1.0;               // -w
    fom.lin(n_half + i, i) = b;                  // +b v
    fom.lin(n_half + i, n_half + i) = -gamma;    // -gamma w
  }
  // Neumann via ghost nodes: both ends fold the neighbor in twice; the
  // inhomogeneous left flux lands in the input map.
  fom.lin(0, 1) = 2.0 * d;
  fom.lin(n_half - 1, n_half - 2) = 2.0 * d;

  fom.input_map = Matrix(n, 2);
  fom.input_map(0, 0) = 2.0 * eps * eps / h;  // carries i0(t)
  for (std::size_t i = 0; i < n; ++i) fom.input_map(i, 1) = 1.0;  // carries c
  fom.forcing = [c](double t) {
    return std::vector<double>{50000.0 * t * t * t * std::exp(-15.0 * t), c};
  };

  fom.pattern.resize(n);
  for (std::size_t i = 0; i < n_half; ++i) fom.pattern[i] = {i};
  fom.nonlin = [n_half](std::size_t comp, std::span<const double> reads) {
    if (comp >= n_half) return 0.0;
    const double v = reads[0];
    return v * (v - 0.1) * (1.0 - v);
  };
  return fom;
}

/// Nonlinear RC ladder, unit resistors and capacitors, diode pair
/// g(v) = e^{40 v} + v - 1 between neighboring nodes; the current source
/// enters node 1. The whole right-hand side apart from the input lives in the
/// nonlinearity (tridiagonal pattern); A = 0.
inline FomModel build_rc_model(std::size_t n) {
  if (n < 3) throw DimensionError("build_rc_model: n < 3");
  FomModel fom;
  fom.dim = n;
  fom.mass_diag.assign(n, 1.0);
  fom.lin = Matrix();  // zero
  fom.input_map = Matrix(n, 1);
  fom.input_map(0, 0) = 1.0;
  fom.forcing = [](double t) { return std::vector<double>{std::exp(-t)}; };

  fom.pattern.resize(n);
  fom.pattern[0] = {0, 1};
  for (std::size_t j = 1; j + 1 < n; ++j) fom.pattern[j] = {j - 1, j, j + 1};
  fom.pattern[n - 1] = {n - 2, n - 1};
  auto g = [](double v) { return std::exp(40.0 * v) + v - 1.0; };
  fom.nonlin = [n, g](std::size_t comp, std::span<const double> reads) {
    if (comp == 0) return -g(reads[0]) - g(reads[0] - reads[1]);
    if (comp == n - 1) return g(reads[0] - reads[1]);
    return g(reads[0] - reads[1]) - g(reads[1] - reads[2]);
  };
  return fom;
}

struct SimResult {
  SnapshotSet states;     // x at the capture instants
  SnapshotSet nonlinear;  // f(x) at the same instants
};

namespace detail {

inline std::vector<std::size_t> capture_steps(std::size_t n_steps, std::size_t count) {
  // nearest step to each of `count` equally spaced times in [t0, t1]
  std::vector<std::size_t> steps(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double frac = count == 1 ? 0.0
                                   : static_cast<double>(k) / static_cast<double>(count - 1);
    steps[k] = static_cast<std::size_t>(std::llround(frac * static_cast<double>(n_steps)));
  }
  return steps;
}

}  // namespace detail

/// Fixed-step semi-implicit Euler: (E - dt A) x+ = E x + dt (f(x) + B g(t)).
/// The linear solve is prefactored once; when A = 0 the step is a diagonal
/// division. Snapshots by nearest-step capture at equally spaced times.
inline SimResult simulate(const FomModel& fom, double t0, double t1, std::size_t n_steps,
                          std::span<const double> x0, std::size_t snapshot_count) {
  const std::size_t n = fom.dim;
  if (x0.size() != n) throw DimensionError("simulate: x0 length != dim");
  if (n_steps < snapshot_count || snapshot_count < 2)
    throw DimensionError("simulate: need n_steps >= snapshot_count >= 2");
  const double dt = (t1 - t0) / static_cast<double>(n_steps);
  const bool lin_zero = fom.lin.rows() == 0 || detail::is_all_zero(fom.lin);

  detail::LuSolver solver;
  if (!lin_zero) {
    Matrix sys = fom.lin;
    for (auto& v : sys.data()) v = -dt * v;
    for (std::size_t i = 0; i < n; ++i) sys(i, i) += fom.mass_diag[i];
    solver = detail::LuSolver(std::move(sys));
  }

  const std::vector<std::size_t> caps = detail::capture_steps(n_steps, snapshot_count);
  SimResult out;
  out.states.matrix = Matrix(n, snapshot_count);
  out.nonlinear.matrix = Matrix(n, snapshot_count);

  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> fx, rhs(n);
  std::size_t next_cap = 0;
  auto capture = [&](std::size_t step) {
    while (next_cap < caps.size() && caps[next_cap] == step) {
      detail::eval_nonlinearity(fom, x, fx);
      const double t = t0 + dt * static_cast<double>(step);
      std::copy(x.begin(), x.end(), out.states.matrix.col(next_cap).begin());
      std::copy(fx.begin(), fx.end(), out.nonlinear.matrix.col(next_cap).begin());
      out.states.coords.push_back(t);
      out.nonlinear.coords.push_back(t);
      ++next_cap;
    }
  };
  capture(0);

  for (std::size_t step = 0; step < n_steps; ++step) {
    const double t = t0 + dt * static_cast<double>(step);
    detail::eval_nonlinearity(fom, x, fx);
    const std::vector<double> g = fom.forcing(t);
    const std::vector<double> bg = matvec(fom.input_map, g);
    for (std::size_t i = 0; i < n; ++i)
      rhs[i] = fom.mass_diag[i] * x[i] + dt * (fx[i] + bg[i]);
    if (lin_zero) {
      for (std::size_t i = 0; i < n; ++i) x[i] = rhs[i] / fom.mass_diag[i];
    } else {
      solver.solve_in_place(rhs);
      x = rhs;
    }
    for (double v : x)
      if (!std::isfinite(v))
        throw IntegrationError("simulate: solution blew up", t + dt);
    capture(step + 1);
  }
  return out;
}

/// Reduced-model counterpart of simulate(); returns reduced coordinates.
inline SnapshotSet simulate(const ReducedModel& rom, double t0, double t1,
                            std::size_t n_steps, std::span<const double> x0r,
                            std::size_t snapshot_count) {
  const std::size_t r = rom.basis.cols(), n = rom.basis.rows();
  if (x0r.size() != r) throw DimensionError("simulate: x0 length != reduced dim");
  if (n_steps < snapshot_count || snapshot_count < 2)
    throw DimensionError("simulate: need n_steps >= snapshot_count >= 2");
  const double dt = (t1 - t0) / static_cast<double>(n_steps);

  Matrix sys = rom.mass_r;
  if (!rom.lin_zero)
    for (std::size_t idx = 0; idx < sys.data().size(); ++idx)
      sys.data()[idx] -= dt * rom.lin_r.data()[idx];
  detail::LuSolver solver(std::move(sys));

  const std::vector<std::size_t> caps = detail::capture_steps(n_steps, snapshot_count);
  SnapshotSet out;
  out.matrix = Matrix(r, snapshot_count);

  std::vector<double> x(x0r.begin(), x0r.end());
  std::vector<double> rhs(r), fr, xfull, ffull;
  FomModel lift;  // used only for the exact (no-sampling) nonlinearity path
  if (!rom.deim) {
    lift.dim = n;
    lift.pattern = rom.pattern;
    lift.nonlin = rom.nonlin;
  }
  std::size_t next_cap = 0;
  auto capture = [&](std::size_t step) {
    while (next_cap < caps.size() && caps[next_cap] == step) {
      std::copy(x.begin(), x.end(), out.matrix.col(next_cap).begin());
      out.coords.push_back(t0 + dt * static_cast<double>(step));
      ++next_cap;
    }
  };
  capture(0);

  for (std::size_t step = 0; step < n_steps; ++step) {
    const double t = t0 + dt * static_cast<double>(step);
    if (rom.deim) {
      fr = reduced_nonlinear_eval(rom, x);
    } else {
      xfull = matvec(rom.basis, x);
      detail::eval_nonlinearity(lift, xfull, ffull);
      fr = matvec_transpose(rom.basis, ffull);
    }
    const std::vector<double> g = rom.forcing(t);
    const std::vector<double> bg = matvec(rom.input_r, g);
    const std::vector<double> ex = matvec(rom.mass_r, x);
    for (std::size_t i = 0; i < r; ++i) rhs[i] = ex[i] + dt * (fr[i] + bg[i]);
    solver.solve_in_place(rhs);
    x = rhs;
    for (double v : x)
      if (!std::isfinite(v))
        throw IntegrationError("simulate: reduced solution blew up", t + dt);
    capture(step + 1);
  }
  return out;
}

enum class ParamFunKind { kDecayingOscillation, kSinhCosh };

/// Columns f(., mu) over the abscissa grid, one per mu.
/// decaying-oscillation: 10 e^{-mu t} (cos(4 mu t) + sin(4 mu t)), t in [1,6].
/// sinh-cosh: sinh(mu cosh(mu / x)), x in [0.1,6]. Overflowing columns are
/// clamped to +-DBL_MAX and reported through `flagged` when provided.
inline SnapshotSet param_fun_snapshots(ParamFunKind kind, std::span<const double> t_grid,
                                       std::span<const double> mu_grid,
                                       std::vector<std::size_t>* flagged = nullptr) {
  if (t_grid.empty() || mu_grid.empty())
    throw DimensionError("param_fun_snapshots: empty grid");
  if (kind == ParamFunKind::kSinhCosh)
    for (double x : t_grid)
      if (x < 0.1) throw DimensionError("param_fun_snapshots: sinh-cosh needs x >= 0.1");
  SnapshotSet out;
  out.matrix = Matrix(t_grid.size(), mu_grid.size());
  out.coords.assign(mu_grid.begin(), mu_grid.end());
  for (std::size_t j = 0; j < mu_grid.size(); ++j) {
    const double mu = mu_grid[j];
    bool bad = false;
    auto cj = out.matrix.col(j);
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      const double t = t_grid[i];
      double v;
      if (kind == ParamFunKind::kDecayingOscillation) {
        v = 10.0 * std::exp(-mu * t) * (std::cos(4.0 * mu * t) + std::sin(4.0 * mu * t));
      } else {
        v = std::sinh(mu * std::cosh(mu / t));
      }
      if (!std::isfinite(v)) {
        bad = true;
        v = std::copysign(std::numeric_limits<double>::max(), v);
      }
      cj[i] = v;
    }
    if (bad && flagged) flagged->push_back(j);
  }
  return out;
}

struct SweepErrors {
  std::vector<double> values;
  std::vector<bool> zero_norm;  // true columns with no mass (absolute error reported)
};

/// Relative 2-norm interpolation errors over an evaluation parameter grid.
inline SweepErrors approximation_sweep(const Matrix& u, const SelectionOperator& sel,
                                       ParamFunKind kind, std::span<const double> t_grid,
                                       std::span<const double> mu_eval_grid) {
  const DeimProjector proj = build_projector(u, sel);
  SweepErrors out;
  out.values.resize(mu_eval_grid.size());
  out.zero_norm.assign(mu_eval_grid.size(), false);
  for (std::size_t j = 0; j < mu_eval_grid.size(); ++j) {
    const double mu[1] = {mu_eval_grid[j]};
    const SnapshotSet col = param_fun_snapshots(kind, t_grid, mu);
    const std::vector<double> fhat = apply(proj, col.matrix.col(0));
    double err = 0.0, ref = 0.0;
    auto f = col.matrix.col(0);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double d = f[i] - fhat[i];
      err += d * d;
      ref += f[i] * f[i];
    }
    if (ref == 0.0) {
      out.values[j] = std::sqrt(err);
      out.zero_norm[j] = true;
    } else {
      out.values[j] = std::sqrt(err / ref);
    }
  }
  return out;
}

}  // namespace deimkit
