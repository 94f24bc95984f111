#include <catch2/catch_amalgamated.hpp>

#include "deimkit/haar.hpp"
#include "deimkit/random.hpp"
#include "deimkit/svd.hpp"

using namespace deimkit;

TEST_CASE("svd of a diagonal matrix") {
  Matrix a(2, 2);
  a(0, 0) = 3.0;
  a(1, 1) = 1.0;
  ThinSvd s = thin_svd(a);
  CHECK(s.sigma[0] == Catch::Approx(3.0).margin(1e-14));
  CHECK(s.sigma[1] == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("rank-1 outer product") {
  Rng rng(2);
  std::vector<double> u(12), v(5);
  for (auto& x : u) x = rng.normal();
  for (auto& x : v) x = rng.normal();
  Matrix a(12, 5);
  for (std::size_t j = 0; j < 5; ++j)
    for (std::size_t i = 0; i < 12; ++i) a(i, j) = u[i] * v[j];
  ThinSvd s = thin_svd(a);
  CHECK(s.sigma[0] == Catch::Approx(norm2(u) * norm2(v)).epsilon(1e-12));
  for (std::size_t i = 1; i < s.sigma.size(); ++i) CHECK(s.sigma[i] < 1e-12 * s.sigma[0]);
}

TEST_CASE("thin svd factors are orthonormal and reconstruct") {
  Rng rng(9);
  for (auto shape : {std::pair<std::size_t, std::size_t>{50, 20}, {20, 50}}) {
    Matrix a = gaussian_matrix(shape.first, shape.second, rng);
    ThinSvd s = thin_svd(a);
    const std::size_t k = std::min(shape.first, shape.second);
    Matrix gz = multiply_at_b(s.left, s.left);
    Matrix gy = multiply_at_b(s.right, s.right);
    for (std::size_t i = 0; i < k; ++i) {
      gz(i, i) -= 1.0;
      gy(i, i) -= 1.0;
    }
    CHECK(max_abs(gz) < 1e-12);
    CHECK(max_abs(gy) < 1e-12);
    for (std::size_t i = 1; i < k; ++i) CHECK(s.sigma[i] <= s.sigma[i - 1]);

    Matrix sv(k, s.right.rows());
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < s.right.rows(); ++j) sv(i, j) = s.sigma[i] * s.right(j, i);
    Matrix rec = s.left * sv;
    double err = 0.0;
    for (std::size_t idx = 0; idx < a.data().size(); ++idx)
      err += (rec.data()[idx] - a.data()[idx]) * (rec.data()[idx] - a.data()[idx]);
    CHECK(std::sqrt(err) <= 100.0 * static_cast<double>(k) * tol::kEps * frobenius_norm(a));

    // Frobenius energy identity
    double energy = 0.0;
    for (double sg : s.sigma) energy += sg * sg;
    const double fro = frobenius_norm(a);
    CHECK(energy == Catch::Approx(fro * fro).epsilon(1e-10));
  }
}

TEST_CASE("smallest singular value agrees across code paths") {
  Rng rng(33);
  Matrix a = gaussian_matrix(10, 10, rng);
  const double s1 = smallest_singular_value(a);
  const double s2 = smallest_singular_value(transpose(a));
  CHECK(s1 == Catch::Approx(s2).epsilon(1e-12));
  CHECK(smallest_singular_value(Matrix::identity(5)) == Catch::Approx(1.0).margin(1e-14));
  Matrix d(2, 2);
  d(0, 0) = 5.0;
  d(1, 1) = 0.2;
  CHECK(smallest_singular_value(d) == Catch::Approx(0.2).margin(1e-14));
}

TEST_CASE("rank-deficient input keeps the left factor orthonormal") {
  Matrix a(6, 3);  // two equal columns -> rank 2
  Rng rng(4);
  for (std::size_t i = 0; i < 6; ++i) {
    a(i, 0) = rng.normal();
    a(i, 1) = a(i, 0);
    a(i, 2) = rng.normal();
  }
  ThinSvd s = thin_svd(a);
  CHECK(s.sigma[2] < 1e-12 * s.sigma[0]);
  Matrix g = multiply_at_b(s.left, s.left);
  for (std::size_t i = 0; i < 3; ++i) g(i, i) -= 1.0;
  CHECK(max_abs(g) < 1e-10);
}
