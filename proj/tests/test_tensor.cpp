#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "deltaclip/tensor.hpp"
#include "oracles.hpp"

using namespace deltaclip;

TEST_CASE("l2_norm on known vectors") {
  CHECK(l2_norm({3.0, 4.0}) == 5.0);
  CHECK(l2_norm(Vector(17, 0.0)) == 0.0);
  CHECK(l2_norm({1.0, 1.0, 1.0, 1.0}) == 2.0);
}

TEST_CASE("l2_norm scales with |c|") {
  RngStream rng(5, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector v = gaussian_vector(1 + static_cast<int>(rng.uniform() * 20), rng);
    const double c = 10.0 * (rng.uniform() - 0.5);
    Vector cv = v;
    for (auto& x : cv) x *= c;
    const double lhs = l2_norm(cv);
    const double rhs = std::abs(c) * l2_norm(v);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("matvec, matmul and transpose agree with hand values") {
  Matrix a(2, 3);
  a(0, 0) = 1; a(0, 1) = 2; a(0, 2) = 3;
  a(1, 0) = 4; a(1, 1) = 5; a(1, 2) = 6;

  const Vector v{1.0, 0.0, -1.0};
  const Vector av = matvec(a, v);
  CHECK(av[0] == -2.0);
  CHECK(av[1] == -2.0);

  const Vector u{1.0, 1.0};
  const Vector atu = matvec_transposed(a, u);
  CHECK(atu[0] == 5.0);
  CHECK(atu[1] == 7.0);

  const Matrix at = transpose(a);
  const Matrix aat = matmul(a, at);
  CHECK(aat.rows == 2);
  CHECK(aat.cols == 2);
  CHECK(aat(0, 0) == 14.0);
  CHECK(aat(0, 1) == 32.0);
  CHECK(aat(1, 0) == 32.0);
  CHECK(aat(1, 1) == 77.0);
}

TEST_CASE("matrix shape errors throw") {
  CHECK_THROWS_AS(Matrix(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(matvec(Matrix::identity(2), Vector{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), std::invalid_argument);
}

TEST_CASE("sym_eig_min on diagonal spectra") {
  CHECK(sym_eig_min(Matrix::identity(3)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sym_eig_min(Matrix::diagonal({2.0, 5.0, 9.0})) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(sym_eig_max(Matrix::diagonal({2.0, 5.0, 9.0})) == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("sym_eig_min matches the characteristic-polynomial oracle on 6x6") {
  RngStream rng(31, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = gaussian_matrix(6, 6, rng);
    const Matrix ata = matmul(transpose(a), a);

    std::vector<std::vector<double>> rows(6, std::vector<double>(6));
    double trace = 0.0;
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) rows[i][j] = ata(i, j);
      trace += ata(i, i);
    }
    const double oracle = oracles::smallest_eigenvalue_by_charpoly(rows, 0.0, trace + 1.0);
    const double got = sym_eig_min(ata);
    CHECK(got == doctest::Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("gram matrices have non-negative minimum eigenvalue") {
  RngStream rng(77, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 6);
    const int m = 1 + static_cast<int>(rng.uniform() * 10);
    const Matrix j = gaussian_matrix(n, m, rng);
    const Matrix k = matmul(j, transpose(j));
    CHECK(sym_eig_min(k) >= -1e-8);
  }
}

TEST_CASE("sym_eig rejects non-square and asymmetric input") {
  CHECK_THROWS_AS(sym_eig_min(Matrix(2, 3)), std::invalid_argument);
  Matrix bad = Matrix::identity(3);
  bad(0, 1) = 1.0;  // asymmetric well beyond tolerance
  CHECK_THROWS_AS(sym_eig_min(bad), std::invalid_argument);
}

TEST_CASE("sym_eig accepts tiny asymmetry and symmetrizes it") {
  Matrix m = Matrix::diagonal({1.0, 2.0});
  m(0, 1) = 1e-13;
  CHECK(sym_eig_min(m) == doctest::Approx(1.0).epsilon(1e-10));
}
