#include <catch2/catch_amalgamated.hpp>

#include "deimkit/haar.hpp"
#include "deimkit/mor.hpp"

using namespace deimkit;

namespace {

// scalar decay x' = -x as a FomModel
FomModel decay_model() {
  FomModel m;
  m.dim = 1;
  m.mass_diag = {1.0};
  m.lin = Matrix(1, 1);
  m.lin(0, 0) = -1.0;
  m.input_map = Matrix(1, 1);
  m.forcing = [](double) { return std::vector<double>{0.0}; };
  m.pattern = {{}};
  m.nonlin = [](std::size_t, std::span<const double>) { return 0.0; };
  return m;
}

double traj_error(const FomModel& m, std::size_t steps) {
  std::vector<double> x0{1.0};
  SimResult r = simulate(m, 0.0, 1.0, steps, x0, 2);
  return std::abs(r.states.matrix(0, 1) - std::exp(-1.0));
}

}  // namespace

TEST_CASE("imex stepping is first order on the decay equation") {
  FomModel m = decay_model();
  const double e1 = traj_error(m, 200);
  const double e2 = traj_error(m, 400);
  const double ratio = e1 / e2;
  CHECK(ratio > 1.7);
  CHECK(ratio < 2.3);
}

TEST_CASE("reduction with the identity basis reproduces the full trajectory") {
  const std::size_t n = 12;
  FomModel fom;
  fom.dim = n;
  fom.mass_diag.assign(n, 1.0);
  Rng rng(14);
  Matrix a = gaussian_matrix(n, n, rng);
  // make it comfortably stable
  for (std::size_t i = 0; i < n; ++i) a(i, i) -= 6.0;
  fom.lin = a;
  fom.input_map = Matrix(n, 1);
  fom.input_map(0, 0) = 1.0;
  fom.forcing = [](double t) { return std::vector<double>{std::sin(t)}; };
  fom.pattern.assign(n, {});
  fom.nonlin = [](std::size_t, std::span<const double>) { return 0.0; };

  std::vector<double> x0(n, 0.1);
  SimResult full = simulate(fom, 0.0, 2.0, 500, x0, 10);
  ReducedModel rom = galerkin_reduce(fom, Matrix::identity(n));
  SnapshotSet red = simulate(rom, 0.0, 2.0, 500, x0, 10);
  double diff = 0.0;
  for (std::size_t idx = 0; idx < red.matrix.data().size(); ++idx)
    diff = std::max(diff, std::abs(red.matrix.data()[idx] - full.states.matrix.data()[idx]));
  CHECK(diff <= 1e-12);
}

TEST_CASE("galerkin_reduce validates orthonormality and matches direct products") {
  FomModel fom = build_fn_model(32);
  Matrix v = haar_orthonormal(fom.dim, 5, 3);
  ReducedModel rom = galerkin_reduce(fom, v);

  Matrix ev(fom.dim, 5);
  for (std::size_t j = 0; j < 5; ++j)
    for (std::size_t i = 0; i < fom.dim; ++i) ev(i, j) = fom.mass_diag[i] * v(i, j);
  Matrix mr = multiply_at_b(v, ev);
  Matrix ar = multiply_at_b(v, fom.lin * v);
  double d1 = 0.0, d2 = 0.0;
  for (std::size_t idx = 0; idx < mr.data().size(); ++idx) {
    d1 = std::max(d1, std::abs(mr.data()[idx] - rom.mass_r.data()[idx]));
    d2 = std::max(d2, std::abs(ar.data()[idx] - rom.lin_r.data()[idx]));
  }
  CHECK(d1 <= 1e-11);
  CHECK(d2 <= 1e-11);

  Matrix skewed = v;
  skewed(0, 0) += 1e-3;
  CHECK_THROWS_AS(galerkin_reduce(fom, skewed), DimensionError);
}

TEST_CASE("sampled nonlinear evaluation matches the dense lift") {
  const std::size_t n = 200, r = 8, m = 6;
  // identity nonlinearity with diagonal pattern
  FomModel fom;
  fom.dim = n;
  fom.mass_diag.assign(n, 1.0);
  fom.input_map = Matrix(n, 1);
  fom.forcing = [](double) { return std::vector<double>{0.0}; };
  fom.pattern.resize(n);
  for (std::size_t i = 0; i < n; ++i) fom.pattern[i] = {i};
  fom.nonlin = [](std::size_t, std::span<const double> reads) { return reads[0]; };

  Matrix v = haar_orthonormal(n, r, 1);
  Matrix u = haar_orthonormal(n, m, 2);
  DeimProjector proj = build_projector(u, qdeim_select(u));
  ReducedModel rom = galerkin_reduce(fom, v, proj);

  Rng rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> xr(r);
    for (auto& x : xr) x = rng.normal();
    std::vector<double> fast = reduced_nonlinear_eval(rom, xr);
    // dense oracle: V^T M S^T (V x_r)
    std::vector<double> xfull = matvec(v, xr);
    std::vector<double> gathered(m);
    for (std::size_t j = 0; j < m; ++j) gathered[j] = xfull[proj.selection.indices[j]];
    std::vector<double> slow = matvec_transpose(v, matvec(proj.interp_matrix, gathered));
    for (std::size_t i = 0; i < r; ++i)
      CHECK(fast[i] == Catch::Approx(slow[i]).margin(1e-12));
  }
}

TEST_CASE("fn cubic sampled evaluation matches the dense lift") {
  FomModel fom = build_fn_model(64);
  const std::size_t r = 6, m = 5;
  std::vector<double> x0(fom.dim, 0.0);
  SimResult sim = simulate(fom, 0.0, 8.0, 800, x0, 40);
  PodBasis vb = pod_basis(sim.states, r);
  PodBasis fb = pod_basis(sim.nonlinear, m);
  DeimProjector proj = build_projector(fb.vectors, qdeim_select(fb.vectors));
  ReducedModel rom = galerkin_reduce(fom, vb.vectors, proj);

  Rng rng(9);
  std::vector<double> xr(r);
  for (auto& x : xr) x = 0.3 * rng.normal();
  std::vector<double> fast = reduced_nonlinear_eval(rom, xr);
  std::vector<double> xfull = matvec(vb.vectors, xr);
  std::vector<double> ffull;
  {
    std::vector<double> gathered(m);
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t p = proj.selection.indices[j];
      const double v = p < 64 ? xfull[p] : 0.0;
      gathered[j] = p < 64 ? v * (v - 0.1) * (1.0 - v) : 0.0;
    }
    ffull = matvec_transpose(vb.vectors, matvec(proj.interp_matrix, gathered));
  }
  const double scale = std::max(1.0, norm2(fast));
  for (std::size_t i = 0; i < r; ++i)
    CHECK(fast[i] == Catch::Approx(ffull[i]).margin(1e-12 * scale));
}

TEST_CASE("fn model structure and equilibria") {
  FomModel fom = build_fn_model(64);
  CHECK(fom.dim == 128);
  // with no stimulus and no constant source the origin is an equilibrium
  FomModel quiet = fom;
  quiet.forcing = [](double) { return std::vector<double>{0.0, 0.0}; };
  std::vector<double> x0(quiet.dim, 0.0);
  SimResult r = simulate(quiet, 0.0, 1.0, 100, x0, 5);
  CHECK(max_abs(r.states.matrix) == 0.0);
  // with the stimulus the voltage stays physically bounded
  SimResult driven = simulate(fom, 0.0, 8.0, 2000, x0, 50);
  double vmin = 0.0, vmax = 0.0;
  for (std::size_t j = 0; j < 50; ++j)
    for (std::size_t i = 0; i < 64; ++i) {
      vmin = std::min(vmin, driven.states.matrix(i, j));
      vmax = std::max(vmax, driven.states.matrix(i, j));
    }
  CHECK(vmin > -0.5);
  CHECK(vmax < 1.5);
  CHECK(driven.states.coords.front() == 0.0);
  CHECK(driven.states.coords.back() == Catch::Approx(8.0).margin(1e-12));
}

TEST_CASE("rc ladder structure, equilibrium, and stable linearization") {
  const std::size_t n = 50;
  FomModel rc = build_rc_model(n);
  FomModel quiet = rc;
  quiet.forcing = [](double) { return std::vector<double>{0.0}; };
  std::vector<double> x0(n, 0.0);
  SimResult r = simulate(quiet, 0.0, 1.0, 2000, x0, 4);
  CHECK(max_abs(r.states.matrix) == 0.0);

  // finite-difference Jacobian at 0 matches the analytic 41-coupling
  // tridiagonal form, and -J is positive definite (all eigenvalues negative)
  Matrix j(n, n);
  const double h = 1e-7;
  std::vector<double> reads;
  for (std::size_t comp = 0; comp < n; ++comp) {
    for (std::size_t k : rc.pattern[comp]) {
      std::vector<double> x(n, 0.0);
      x[k] = h;
      reads.clear();
      for (std::size_t g : rc.pattern[comp]) reads.push_back(x[g]);
      const double fp = rc.nonlin(comp, reads);
      x[k] = -h;
      reads.clear();
      for (std::size_t g : rc.pattern[comp]) reads.push_back(x[g]);
      const double fm = rc.nonlin(comp, reads);
      j(comp, k) = (fp - fm) / (2.0 * h);
    }
  }
  const double gp = 41.0;  // g'(0) = 40 e^0 + 1
  CHECK(j(0, 0) == Catch::Approx(-2.0 * gp).epsilon(1e-5));
  CHECK(j(0, 1) == Catch::Approx(gp).epsilon(1e-5));
  CHECK(j(5, 5) == Catch::Approx(-2.0 * gp).epsilon(1e-5));
  CHECK(j(n - 1, n - 1) == Catch::Approx(-gp).epsilon(1e-5));

  // Cholesky of -J succeeds => J negative definite
  Matrix neg(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) neg(a, b) = -0.5 * (j(a, b) + j(b, a));
  bool spd = true;
  for (std::size_t k = 0; k < n && spd; ++k) {
    double d = neg(k, k);
    for (std::size_t i = 0; i < k; ++i) d -= neg(k, i) * neg(k, i);
    if (d <= 0.0) {
      spd = false;
      break;
    }
    neg(k, k) = std::sqrt(d);
    for (std::size_t r2 = k + 1; r2 < n; ++r2) {
      double s = neg(r2, k);
      for (std::size_t i = 0; i < k; ++i) s -= neg(r2, i) * neg(k, i);
      neg(r2, k) = s / neg(k, k);
    }
  }
  CHECK(spd);
}

TEST_CASE("blow-up raises an integration error with the failure time") {
  FomModel m = decay_model();
  m.lin(0, 0) = 0.0;
  m.pattern = {{0}};
  m.nonlin = [](std::size_t, std::span<const double> reads) {
    return reads[0] * reads[0];  // x' = x^2, finite-time escape
  };
  std::vector<double> x0{5.0};
  try {
    simulate(m, 0.0, 10.0, 1000, x0, 2);
    FAIL("expected blow-up");
  } catch (const IntegrationError& e) {
    CHECK(e.time > 0.0);
    CHECK(e.time <= 10.0);
  }
}

TEST_CASE("parametric function snapshots") {
  std::vector<double> t{1.0, 2.0, 3.0};
  std::vector<double> mu{0.0, 0.5};
  SnapshotSet s = param_fun_snapshots(ParamFunKind::kDecayingOscillation, t, mu);
  REQUIRE(s.matrix.rows() == 3);
  REQUIRE(s.matrix.cols() == 2);
  for (std::size_t i = 0; i < 3; ++i) CHECK(s.matrix(i, 0) == 10.0);  // mu = 0

  std::vector<double> x{0.1, 1.0, 6.0};
  SnapshotSet sh = param_fun_snapshots(ParamFunKind::kSinhCosh, x, mu);
  for (std::size_t i = 0; i < 3; ++i) CHECK(sh.matrix(i, 0) == 0.0);  // sinh(0)

  std::vector<std::size_t> flagged;
  std::vector<double> mu_hot{3.14159};
  param_fun_snapshots(ParamFunKind::kSinhCosh, x, mu_hot, &flagged);
  CHECK(flagged == std::vector<std::size_t>{0});

  std::vector<double> x_bad{0.05};
  CHECK_THROWS_AS(param_fun_snapshots(ParamFunKind::kSinhCosh, x_bad, mu),
                  DimensionError);
}

TEST_CASE("approximation sweep reproduces training parameters") {
  std::vector<double> t(400), mu(12);
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = 1.0 + 5.0 * static_cast<double>(i) / static_cast<double>(t.size() - 1);
  for (std::size_t j = 0; j < mu.size(); ++j)
    mu[j] = 3.141592653589793 * static_cast<double>(j) / static_cast<double>(mu.size() - 1);
  SnapshotSet s = param_fun_snapshots(ParamFunKind::kDecayingOscillation, t, mu);
  PodBasis basis = pod_basis(s, 12);
  auto sel = qdeim_select(basis.vectors);
  SweepErrors sweep = approximation_sweep(basis.vectors, sel,
                                          ParamFunKind::kDecayingOscillation, t, mu);
  for (double e : sweep.values) CHECK(e < 1e-8);
}
