#include <cmath>

#include <doctest.h>

#include "support.hpp"
#include "symfact/rng.hpp"

using namespace symfact;
using symfact::test::close;
using symfact::test::diff;

namespace {
const Complex I{0.0, 1.0};
const double kRoot2 = std::sqrt(2.0);
}  // namespace

TEST_CASE("bilinear product does not conjugate") {
  CHECK(close(bilinear(Vector{1.0, 0.0}, Vector{0.0, 1.0}), 0.0));
  CHECK(close(bilinear(Vector{1.0, I}, Vector{1.0, I}), 0.0));
  CHECK(close(bilinear(Vector{1.0, I}, Vector{2.0, 3.0}), Complex(2.0, 3.0)));
  CHECK_THROWS_AS(bilinear(Vector{1.0}, Vector{1.0, 2.0}), DimensionError);
}

TEST_CASE("sesquilinear product conjugates the second argument") {
  CHECK(close(sesquilinear(Vector{1.0, I}, Vector{1.0, I}), 2.0));
  CHECK(close(sesquilinear(Vector{1.0, 0.0}, Vector{0.0, 1.0}), 0.0));
  CHECK(close(sesquilinear(Vector{I, 0.0}, Vector{1.0, 0.0}), I));
  CHECK_THROWS_AS(sesquilinear(Vector{1.0}, Vector{1.0, 2.0}), DimensionError);
}

TEST_CASE("inner products: conjugate symmetry and bilinear symmetry on random vectors") {
  Rng rng(11, "inner-products");
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = 1 + rng.index(8);
    const Vector u = rng.complex_vector(n);
    const Vector v = rng.complex_vector(n);
    CHECK(close(sesquilinear(u, v), std::conj(sesquilinear(v, u)), 1e-13));
    CHECK(close(bilinear(u, v), bilinear(v, u), 1e-13));
  }
}

TEST_CASE("complement_basis examples") {
  SUBCASE("axis vector") {
    const auto b = complement_basis(Vector{1.0, 0.0});
    REQUIRE(b.size() == 1);
    CHECK(std::abs(b[0][0]) < 1e-15);
    CHECK(std::abs(std::abs(b[0][1]) - 1.0) < 1e-15);
  }
  SUBCASE("isotropic (1, i) gives the span of (-i, 1)") {
    const Vector e{1.0, I};
    const auto b = complement_basis(e);
    REQUIRE(b.size() == 1);
    CHECK(std::abs(bilinear(e, b[0])) < 1e-15);
    // proportional to (-i, 1)/sqrt2: the 2x2 determinant with that vector vanishes
    const Vector ref{-I / kRoot2, 1.0 / kRoot2};
    CHECK(std::abs(b[0][0] * ref[1] - b[0][1] * ref[0]) < 1e-15);
    CHECK(std::abs(norm(b[0]) - 1.0) < 1e-15);
  }
  SUBCASE("third axis in three dimensions") {
    const auto b = complement_basis(Vector{0.0, 0.0, 1.0});
    REQUIRE(b.size() == 2);
    for (const auto& w : b) CHECK(std::abs(w[2]) < 1e-15);
    CHECK(std::abs(sesquilinear(b[0], b[1])) < 1e-15);
  }
  CHECK_THROWS_AS(complement_basis(Vector{0.0, 0.0}), ValidationError);
}

TEST_CASE("complement_basis properties on random vectors") {
  Rng rng(12, "complement");
  for (int k = 0; k < 40; ++k) {
    const std::size_t n = 2 + rng.index(9);
    const Vector e = rng.complex_vector(n);
    const auto b = complement_basis(e);
    REQUIRE(b.size() == n - 1);
    for (std::size_t i = 0; i < b.size(); ++i) {
      CHECK(std::abs(bilinear(e, b[i])) <= 1e-13 * norm(e));
      for (std::size_t j = 0; j < b.size(); ++j) {
        CHECK(close(sesquilinear(b[i], b[j]), i == j ? 1.0 : 0.0, 1e-13));
      }
    }
    std::vector<Vector> cols = b;
    cols.push_back(e);
    // With e appended the columns span the space.
    CHECK(std::abs(determinant(Matrix::from_columns(cols))) > 1e-6 * norm(e));
  }
}

TEST_CASE("complement_basis_within examples") {
  SUBCASE("(1, i, 0)/sqrt2 leaves the third axis") {
    const Vector e{1.0 / kRoot2, I / kRoot2, 0.0};
    const auto b = complement_basis_within(e);
    REQUIRE(b.size() == 1);
    CHECK(std::abs(b[0][0]) < 1e-15);
    CHECK(std::abs(b[0][1]) < 1e-15);
    CHECK(std::abs(std::abs(b[0][2]) - 1.0) < 1e-15);
  }
  SUBCASE("(1, i) in two dimensions has an empty complement") {
    CHECK(complement_basis_within(Vector{1.0, I}).empty());
  }
  SUBCASE("(1, 0, 0, i) in four dimensions leaves two vectors") {
    const Vector e{1.0, 0.0, 0.0, I};
    const auto b = complement_basis_within(e);
    REQUIRE(b.size() == 2);
    const Vector ebar = conj(e);
    for (const auto& w : b) {
      CHECK(std::abs(sesquilinear(w, e)) < 1e-15);
      CHECK(std::abs(sesquilinear(w, ebar)) < 1e-15);
    }
    CHECK(std::abs(sesquilinear(b[0], b[1])) < 1e-15);
  }
  CHECK_THROWS_AS(complement_basis_within(Vector{1.0, 0.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(complement_basis_within(Vector{0.0, 0.0}), ValidationError);
}

TEST_CASE("solve_linear examples") {
  Rng rng(13, "solve");
  const Matrix b = rng.complex_matrix(3, 2);
  CHECK(diff(solve_linear(Matrix::identity(3), b), b) < 1e-15);
  CHECK(diff(solve_linear(Matrix{{2.0, 0.0}, {0.0, 4.0}}, Matrix::identity(2)),
             Matrix{{0.5, 0.0}, {0.0, 0.25}}) < 1e-15);
  const Matrix x = solve_linear(Matrix{{1.0, 1.0}, {0.0, 1.0}}, Matrix{{1.0}, {1.0}});
  CHECK(diff(x, Matrix{{0.0}, {1.0}}) < 1e-15);
  CHECK_THROWS_AS(solve_linear(Matrix{{1.0, 2.0}, {2.0, 4.0}}, Matrix::identity(2)), SingularMatrixError);
  CHECK_THROWS_AS(solve_linear(Matrix(2, 3), Matrix(2, 1)), DimensionError);
}

TEST_CASE("solve_linear reproduces the right-hand side for well-conditioned systems") {
  Rng rng(14, "solve-random");
  int tried = 0;
  while (tried < 50) {
    const std::size_t n = 1 + rng.index(10);
    const Matrix a = rng.complex_matrix(n, n);
    if (condition_estimate(a) > 1e6) continue;
    ++tried;
    const Matrix b = rng.complex_matrix(n, 3);
    const Matrix x = solve_linear(a, b);
    CHECK(diff(a * x, b) <= 1e-8 * b.frobenius_norm());
  }
}

TEST_CASE("determinant examples and multiplicativity") {
  CHECK(close(determinant(Matrix::identity(3)), 1.0));
  CHECK(close(determinant(Matrix{{1.0, 2.0}, {3.0, 4.0}}), -2.0, 1e-14));
  CHECK(close(determinant(Matrix{{0.0, 1.0}, {1.0, 0.0}}), -1.0));
  CHECK_THROWS_AS(determinant(Matrix(2, 3)), DimensionError);
  // triangular input: product of the diagonal, exactly
  const Matrix t{{2.0, 5.0, I}, {0.0, 3.0, 7.0}, {0.0, 0.0, -I}};
  CHECK(determinant(t) == Complex(0.0, -6.0));

  Rng rng(15, "det");
  for (int k = 0; k < 30; ++k) {
    const Matrix a = rng.complex_matrix(4, 4);
    const Matrix b = rng.complex_matrix(4, 4);
    const Complex lhs = determinant(a * b);
    const Complex rhs = determinant(a) * determinant(b);
    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::abs(rhs));
    CHECK(std::abs(determinant(a) - test::cofactor_det(a)) <= 1e-12 * std::abs(test::cofactor_det(a)) + 1e-14);
  }
}

TEST_CASE("principal_sqrt branch choice") {
  CHECK(close(principal_sqrt(4.0), 2.0));
  CHECK(close(principal_sqrt(-4.0), Complex(0.0, 2.0)));
  CHECK(close(principal_sqrt(Complex(0.0, 2.0)), Complex(1.0, 1.0), 1e-15));
  CHECK(principal_sqrt(Complex(-4.0, -0.0)) == Complex(0.0, 2.0));  // tie rule on the imaginary axis
  CHECK(principal_sqrt(0.0) == Complex(0.0, 0.0));
}

TEST_CASE("principal_sqrt squares back over a grid of the plane") {
  int checked = 0;
  for (int a = -16; a < 16; ++a)
    for (int b = -16; b < 16; ++b) {
      const Complex z(0.37 * a, 0.53 * b);
      const Complex w = principal_sqrt(z);
      CHECK(std::abs(w * w - z) <= 1e-14 * std::max(std::abs(z), 1e-300));
      CHECK(w.real() >= 0.0);
      if (w.real() == 0.0) CHECK(w.imag() >= 0.0);
      ++checked;
    }
  CHECK(checked >= 1000);
}

TEST_CASE("matrix operations") {
  const Matrix a{{1.0, I}, {2.0, 3.0}};
  CHECK(a.transpose()(0, 1) == Complex(2.0));
  CHECK(a.adjoint()(1, 0) == -I);
  CHECK(a.conj()(0, 1) == -I);
  CHECK(std::abs(a.frobenius_norm() - std::sqrt(15.0)) < 1e-14);
  CHECK(diff(a * Matrix::identity(2), a) == 0.0);
  CHECK_THROWS_AS(a * Matrix(3, 3), DimensionError);
  CHECK_THROWS_AS(a + Matrix(3, 3), DimensionError);
  // the scaled norm must not overflow
  const Matrix big{{1e200, 1e200}};
  CHECK(std::isfinite(big.frobenius_norm()));
  CHECK_THROWS_AS(require_finite(Matrix{{std::nan("")}}, "test"), ValidationError);
}

TEST_CASE("numerical rank and null space") {
  const Matrix a{{1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}, {1.0, 0.0, 1.0}};
  CHECK(numerical_rank(a) == 2);
  const Matrix ns = null_space(a);
  REQUIRE(ns.cols() == 1);
  CHECK((a * ns).frobenius_norm() < 1e-13);
  CHECK(null_space(Matrix::identity(3)).cols() == 0);
}

TEST_CASE("tolerance configuration validation") {
  ToleranceConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.iso_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.max_qr_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("rng streams are reproducible and label-separated") {
  Rng a(7, "x");
  Rng b(7, "x");
  Rng c(7, "y");
  const auto va = a.complex_vector(5);
  CHECK(va == b.complex_vector(5));
  CHECK(va != c.complex_vector(5));
  CHECK(Rng(7, "x").split("child").label() == "x/child");
  Rng u(8, "uniform");
  for (int k = 0; k < 1000; ++k) {
    const double x = u.uniform();
    CHECK((x >= 0.0 && x < 1.0));
  }
}
