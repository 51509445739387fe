#include <cmath>
#include <variant>

#include <doctest.h>

#include "support.hpp"
#include "symfact/antilinear.hpp"
#include "symfact/factorization.hpp"
#include "symfact/oracle.hpp"
#include "symfact/rng.hpp"

using namespace symfact;
using symfact::test::close;
using symfact::test::diff;

namespace {
const Complex I{0.0, 1.0};

// One level of multiplicity n with Psi = Phi = I.
BiorthonormalSystem flat_system(std::size_t n, Complex value = 1.0) {
  BiorthonormalSystem sys;
  sys.dim = n;
  sys.levels.push_back({value, n, Matrix::identity(n), Matrix::identity(n)});
  return sys;
}

Matrix random_symmetric_invertible(Rng& rng, std::size_t n) {
  for (;;) {
    const Matrix g = rng.complex_matrix(n, n);
    Matrix c = g + g.transpose();
    if (condition_estimate(c) < 1e4) return c;
  }
}

Matrix random_invertible(Rng& rng, std::size_t n) {
  for (;;) {
    Matrix v = rng.complex_matrix(n, n);
    if (condition_estimate(v) < 1e4) return v;
  }
}

// Row-major vectorization of N -> H N - N conj(H).
Matrix commutation_operator(const Matrix& h) {
  const std::size_t n = h.rows();
  const Matrix hb = h.conj();
  Matrix k(n * n, n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t l = 0; l < n; ++l) {
        k(i * n + j, l * n + j) += h(i, l);   // (H N)_ij = sum_l H_il N_lj
        k(i * n + j, i * n + l) -= hb(l, j);  // (N conj H)_ij = sum_l N_il conj(H)_lj
      }
  return k;
}

Matrix unvec(std::span<const Complex> v, std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = v[i * n + j];
  return m;
}
}  // namespace

TEST_CASE("apply examples") {
  const Vector a = symfact::apply({Matrix::identity(2)}, Vector{I, 1.0});
  CHECK(close(a[0], -I));
  CHECK(close(a[1], 1.0));
  const Vector b = symfact::apply({Matrix{{0.0, 1.0}, {1.0, 0.0}}}, Vector{1.0, I});
  CHECK(close(b[0], -I));
  CHECK(close(b[1], 1.0));
  const Vector z{Complex(0.3, -1.2), Complex(2.0, 0.5)};
  const AntilinearOp id{Matrix::identity(2)};
  CHECK(symfact::apply(id, symfact::apply(id, z)) == z);
  CHECK_THROWS_AS(symfact::apply(id, Vector{1.0}), DimensionError);
}

TEST_CASE("apply is antilinear and apply_inverse undoes it") {
  Rng rng(41, "antilinear");
  const AntilinearOp op{random_invertible(rng, 4)};
  const Vector u = rng.complex_vector(4);
  const Vector v = rng.complex_vector(4);
  const Complex x(0.7, 1.1);
  const Complex y(-0.2, 0.4);
  Vector comb(4);
  for (std::size_t i = 0; i < 4; ++i) comb[i] = x * u[i] + y * v[i];
  const Vector lhs = symfact::apply(op, comb);
  const Vector au = symfact::apply(op, u);
  const Vector av = symfact::apply(op, v);
  for (std::size_t i = 0; i < 4; ++i) CHECK(close(lhs[i], std::conj(x) * au[i] + std::conj(y) * av[i], 1e-13));
  const Vector back = apply_inverse(op, au);
  for (std::size_t i = 0; i < 4; ++i) CHECK(close(back[i], u[i], 1e-10));
}

TEST_CASE("is_hermitian examples") {
  CHECK(is_hermitian({Matrix::identity(3)}));
  CHECK_FALSE(is_hermitian({Matrix{{0.0, 1.0}, {-1.0, 0.0}}}));
  CHECK(is_hermitian({Matrix{{1.0, Complex(2.0, 1.0)}, {Complex(2.0, 1.0), 3.0 * I}}}));
  const auto r = hermiticity_residual({Matrix{{0.0, 1.0}, {-1.0, 0.0}}});
  CHECK(r.absolute == doctest::Approx(2.0 * std::sqrt(2.0)));
  CHECK(r.relative == doctest::Approx(2.0));
}

TEST_CASE("build_t examples") {
  SUBCASE("diagonal self-adjoint H with identity coefficients") {
    const auto sys = biorthonormal_system(Matrix::diagonal(Vector{1.0, 2.0, 3.0}));
    const auto op = build_t(sys, identity_coeffs(sys));
    CHECK(diff(op.m, Matrix::identity(3)) < 1e-14);
  }
  SUBCASE("single level with swap coefficients") {
    const Matrix swap{{0.0, 1.0}, {1.0, 0.0}};
    const auto op = build_t(flat_system(2), {swap});
    CHECK(diff(op.m, swap) == 0.0);
  }
  SUBCASE("upper triangular H: pseudo-Hermitian through Phi Phi^T") {
    const Matrix h{{1.0, 1.0}, {0.0, 2.0}};
    const auto sys = biorthonormal_system(h);
    const auto op = build_t(sys, identity_coeffs(sys));
    CHECK(diff(op.m, sys.phi() * sys.phi().transpose()) < 1e-14);
    CHECK(check_pseudo_hermitian(h, op).relative <= 1e-9);
  }
  SUBCASE("invalid coefficients") {
    const auto sys = flat_system(2);
    CHECK_THROWS_AS(build_t(sys, {Matrix{{1.0, 2.0}, {0.0, 1.0}}}), ValidationError);
    CHECK_THROWS_AS(build_t(sys, {Matrix{{1.0, 1.0}, {1.0, 1.0}}}), SingularMatrixError);
    CHECK_THROWS_AS(build_t(sys, {Matrix::identity(3)}), DimensionError);
    CHECK_THROWS_AS(build_t(sys, {}), DimensionError);
  }
}

TEST_CASE("build_t is Hermitian and pseudo-Hermitian for random diagonalizable H") {
  Rng rng(42, "lemma");
  for (std::uint64_t s = 0; s < 40; ++s) {
    const std::size_t n = 1 + s % 10;
    const Matrix h = oracle::gen({n, s, s % 2 ? oracle::Kind::UnpairedSpectrum : oracle::Kind::PairedSpectrum});
    const auto sys = biorthonormal_system(h);
    CoefficientSet coeffs;
    for (const auto& l : sys.levels) coeffs.push_back(random_symmetric_invertible(rng, l.multiplicity));
    const auto op = build_t(sys, coeffs);
    CHECK(diff(op.m, op.m.transpose()) <= 1e-10 * op.m.frobenius_norm());
    CHECK(check_pseudo_hermitian(h, op).relative <= 1e-8);
  }
}

TEST_CASE("check_pseudo_hermitian examples") {
  CHECK(check_pseudo_hermitian(Matrix::diagonal(Vector{1.0, -2.0}), AntilinearOp{Matrix::identity(2)}).absolute == 0.0);
  const Matrix h = Matrix::diagonal(Vector{I, -I});
  // The antilinear swap maps H to swap conj(H) swap = H, not H^*: the residual
  // H^* M - M conj(H) = [[0, -2i], [2i, 0]]. The identity works instead.
  const AntilinearOp swap{Matrix{{0.0, 1.0}, {1.0, 0.0}}};
  CHECK(diff(h.adjoint() * swap.m, Matrix{{0.0, -I}, {I, 0.0}}) == 0.0);
  CHECK(check_pseudo_hermitian(h, swap).absolute == doctest::Approx(2.0 * std::sqrt(2.0)));
  CHECK(check_pseudo_hermitian(h, AntilinearOp{Matrix::identity(2)}).absolute == 0.0);
  const auto jordan = check_pseudo_hermitian(Matrix{{0.0, 1.0}, {0.0, 0.0}}, AntilinearOp{Matrix::identity(2)});
  CHECK(jordan.absolute == doctest::Approx(std::sqrt(2.0)));
  CHECK(jordan.relative == doctest::Approx(1.0));
  CHECK_THROWS_AS(check_pseudo_hermitian(h, AntilinearOp{Matrix(2, 2)}), SingularMatrixError);
}

TEST_CASE("check_pseudo_hermitian linear form") {
  // H = diag(i, -i) is G-Hermitian for G = swap: H^* G = G H
  const Matrix h = Matrix::diagonal(Vector{I, -I});
  CHECK(check_pseudo_hermitian(h, Matrix{{0.0, 1.0}, {1.0, 0.0}}).absolute == 0.0);
  CHECK(check_pseudo_hermitian(h, Matrix::identity(2)).absolute > 1.0);
  CHECK_THROWS_AS(check_pseudo_hermitian(h, Matrix(2, 2)), SingularMatrixError);
}

TEST_CASE("transform_basis examples") {
  const auto sys = biorthonormal_system(Matrix{{1.0, 1.0}, {0.0, 2.0}});
  BasisChange ident;
  for (const auto& l : sys.levels) ident.push_back(Matrix::identity(l.multiplicity));
  const auto same = transform_basis(sys, ident);
  CHECK(diff(same.phi(), sys.phi()) < 1e-15);
  CHECK(diff(same.psi(), sys.psi()) < 1e-15);

  const auto scaled_sys = transform_basis(flat_system(1), {Matrix{{2.0}}});
  CHECK(close(scaled_sys.levels[0].phi(0, 0), 2.0));
  CHECK(close(scaled_sys.levels[0].psi(0, 0), 0.5));

  Rng rng(43, "basis");
  for (int k = 0; k < 20; ++k) {
    const auto moved = transform_basis(flat_system(2), {random_invertible(rng, 2)});
    CHECK(diff(moved.phi().adjoint() * moved.psi(), Matrix::identity(2)) <= 1e-10);
  }
  CHECK_THROWS_AS(transform_basis(flat_system(2), {Matrix(2, 2)}), SingularMatrixError);
}

TEST_CASE("transform_coeffs examples") {
  const Matrix swap{{0.0, 1.0}, {1.0, 0.0}};
  CHECK(diff(transform_coeffs({swap}, {Matrix::identity(2)})[0], swap) == 0.0);
  CHECK(close(transform_coeffs({Matrix{{4.0}}}, {Matrix{{2.0}}})[0](0, 0), 1.0));
  const auto f = factor_symmetric(swap);
  CHECK(diff(transform_coeffs({swap}, {f.v})[0], Matrix::identity(2)) <= 1e-10);
}

TEST_CASE("covariance: paired transforms leave M unchanged") {
  Rng rng(44, "covariance");
  for (std::uint64_t s = 0; s < 20; ++s) {
    const std::size_t n = 2 + s % 6;
    Vector spectrum(n);
    for (std::size_t i = 0; i < n; ++i) spectrum[i] = Complex(static_cast<double>(i % 3), 0.0);
    const Matrix h = oracle::gen_diagonalizable(spectrum, s);
    const auto sys = biorthonormal_system(h);
    CoefficientSet c;
    BasisChange v;
    for (const auto& l : sys.levels) {
      c.push_back(random_symmetric_invertible(rng, l.multiplicity));
      v.push_back(random_invertible(rng, l.multiplicity));
    }
    const Matrix before = build_t(sys, c).m;
    const Matrix after = build_t(transform_basis(sys, v), transform_coeffs(c, v)).m;
    CHECK(diff(before, after) <= 1e-9 * before.frobenius_norm());
  }
}

TEST_CASE("canonicalize examples") {
  SUBCASE("identity coefficients are a fixed point") {
    const auto sys = biorthonormal_system(Matrix{{1.0, 1.0}, {0.0, 2.0}});
    const auto canon = canonicalize(sys, identity_coeffs(sys));
    CHECK(diff(canon.system.phi(), sys.phi()) == 0.0);
    CHECK(diff(canon.op.m, build_t(sys, identity_coeffs(sys)).m) < 1e-15);
  }
  SUBCASE("scalar level") {
    const auto canon = canonicalize(flat_system(1), {Matrix{{4.0}}});
    CHECK(close(canon.basis_change[0](0, 0), 2.0, 1e-14));
    CHECK(close(canon.coeffs[0](0, 0), 1.0, 1e-14));
    CHECK(close(canon.op.m(0, 0), 4.0, 1e-14));
  }
  SUBCASE("swap coefficients go through the factorization") {
    const Matrix swap{{0.0, 1.0}, {1.0, 0.0}};
    const auto sys = flat_system(2);
    const auto canon = canonicalize(sys, {swap});
    CHECK(diff(canon.coeffs[0], Matrix::identity(2)) <= 1e-10);
    CHECK(diff(canon.op.m, build_t(sys, {swap}).m) <= 1e-9);
    const Matrix& v = canon.basis_change[0];
    CHECK(diff(v * v.transpose(), swap) <= 1e-10);
  }
}

TEST_CASE("canonicalize is idempotent and keeps M on random inputs") {
  Rng rng(45, "canonicalize");
  for (std::uint64_t s = 0; s < 20; ++s) {
    const std::size_t n = 1 + s % 7;
    Vector spectrum(n);
    for (std::size_t i = 0; i < n; ++i) spectrum[i] = Complex(static_cast<double>(i % 2), 0.5 * static_cast<double>(i % 2));
    const auto sys = biorthonormal_system(oracle::gen_diagonalizable(spectrum, s));
    CoefficientSet c;
    for (const auto& l : sys.levels) c.push_back(random_symmetric_invertible(rng, l.multiplicity));
    const Matrix m = build_t(sys, c).m;
    const auto once = canonicalize(sys, c);
    CHECK(diff(once.op.m, m) <= 1e-9 * m.frobenius_norm());
    for (const auto& ci : once.coeffs) CHECK(diff(ci, Matrix::identity(ci.rows())) <= 1e-9);
    const auto twice = canonicalize(once.system, identity_coeffs(once.system));
    CHECK(diff(twice.op.m, once.op.m) <= 1e-12 * m.frobenius_norm());
    CHECK(diff(twice.system.phi(), once.system.phi()) == 0.0);
  }
}

TEST_CASE("spectrum_pairing examples") {
  SUBCASE("real spectrum is fixed pointwise") {
    const auto r = spectrum_pairing({1.0, 2.0, 3.0}, {1, 1, 1}, 1e-9);
    REQUIRE(std::holds_alternative<SpectrumPairing>(r));
    const auto& p = std::get<SpectrumPairing>(r);
    CHECK(p.partner == std::vector<std::size_t>{0, 1, 2});
    CHECK(p.real == std::vector<bool>{true, true, true});
  }
  SUBCASE("conjugate pair swaps") {
    const auto r = spectrum_pairing({Complex(1.0, 1.0), Complex(1.0, -1.0), 5.0}, {1, 1, 1}, 1e-9);
    REQUIRE(std::holds_alternative<SpectrumPairing>(r));
    const auto& p = std::get<SpectrumPairing>(r);
    CHECK(p.partner == std::vector<std::size_t>{1, 0, 2});
    CHECK(p.real == std::vector<bool>{false, false, true});
  }
  SUBCASE("lonely complex eigenvalue") {
    const auto r = spectrum_pairing({Complex(1.0, 1.0), 2.0}, {1, 1}, 1e-9);
    REQUIRE(std::holds_alternative<Unpairable>(r));
    CHECK(std::get<Unpairable>(r).offending == std::vector<Complex>{Complex(1.0, 1.0)});
  }
  SUBCASE("multiplicities must match") {
    const auto r = spectrum_pairing({Complex(1.0, 1.0), Complex(1.0, -1.0)}, {2, 1}, 1e-9);
    CHECK(std::holds_alternative<Unpairable>(r));
  }
}

TEST_CASE("pairing is an involution on generated paired spectra") {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto sys = biorthonormal_system(oracle::gen({1 + s % 10, s, oracle::Kind::PairedSpectrum}));
    const auto r = spectrum_pairing(sys);
    REQUIRE(std::holds_alternative<SpectrumPairing>(r));
    const auto& p = std::get<SpectrumPairing>(r);
    const auto vals = sys.level_values();
    for (std::size_t k = 0; k < p.partner.size(); ++k) {
      CHECK(p.partner[p.partner[k]] == k);
      CHECK(close(vals[p.partner[k]], std::conj(vals[k]), 1e-7));
      CHECK(sys.levels[p.partner[k]].multiplicity == sys.levels[k].multiplicity);
    }
  }
}

TEST_CASE("build_antilinear_symmetry examples") {
  SUBCASE("real diagonal H") {
    const auto sys = biorthonormal_system(Matrix::diagonal(Vector{1.0, 2.0}));
    const auto p = std::get<SpectrumPairing>(spectrum_pairing(sys));
    const auto n = build_antilinear_symmetry(sys, p);
    CHECK(diff(n.m, Matrix::identity(2)) < 1e-14);
  }
  SUBCASE("diag(i, -i) gives the swap") {
    const Matrix h = Matrix::diagonal(Vector{I, -I});
    const auto sys = biorthonormal_system(h);
    const auto n = build_antilinear_symmetry(sys, std::get<SpectrumPairing>(spectrum_pairing(sys)));
    CHECK(diff(n.m, Matrix{{0.0, 1.0}, {1.0, 0.0}}) < 1e-14);
    CHECK(diff(h * n.m, Matrix{{0.0, I}, {-I, 0.0}}) < 1e-14);
    CHECK(check_commutes(h, n).absolute < 1e-14);
  }
}

TEST_CASE("paired spectra always admit a commuting invertible antilinear symmetry") {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const Matrix h = oracle::gen({1 + s % 10, 1000 + s, oracle::Kind::PairedSpectrum});
    const auto sys = biorthonormal_system(h);
    const auto r = spectrum_pairing(sys);
    REQUIRE(std::holds_alternative<SpectrumPairing>(r));
    const auto n = build_antilinear_symmetry(sys, std::get<SpectrumPairing>(r));
    CHECK(check_commutes(h, n).relative <= 1e-8);
    CHECK(condition_estimate(n.m) <= 1e6);
  }
}

TEST_CASE("unpaired spectra admit no invertible commuting antilinear map") {
  Rng rng(46, "converse");
  for (std::uint64_t s = 0; s < 20; ++s) {
    const std::size_t n = 1 + s % 4;
    const Matrix h = oracle::gen({n, s, oracle::Kind::UnpairedSpectrum});
    CHECK(std::holds_alternative<Unpairable>(spectrum_pairing(biorthonormal_system(h))));
    // Im E > 0 throughout: H and conj(H) share no eigenvalue, so only N = 0 commutes
    CHECK(null_space(commutation_operator(h)).cols() == 0);
  }
  // Partly paired: {1+i, 1-i, 2i}. Solutions exist but none is invertible.
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Matrix h = oracle::gen_diagonalizable(Vector{Complex(1.0, 1.0), Complex(1.0, -1.0), 2.0 * I}, s);
    CHECK(std::holds_alternative<Unpairable>(spectrum_pairing(biorthonormal_system(h))));
    const Matrix ns = null_space(commutation_operator(h));
    CHECK(ns.cols() == 2);
    for (int k = 0; k < 10; ++k) {
      const Vector coef = rng.complex_vector(ns.cols());
      const Matrix nm = unvec(ns * coef, 3);
      CHECK(diff(h * nm, nm * h.conj()) <= 1e-9 * nm.frobenius_norm());
      CHECK(numerical_rank(nm, 1e-8) < 3);
    }
  }
  // Sanity: the same operator finds full-rank solutions when pairing exists.
  const Matrix hp = oracle::gen_diagonalizable(Vector{Complex(1.0, 1.0), Complex(1.0, -1.0), 2.0}, 3);
  const Matrix nsp = null_space(commutation_operator(hp));
  CHECK(nsp.cols() == 3);
  const Matrix np = unvec(nsp * rng.complex_vector(3), 3);
  CHECK(numerical_rank(np, 1e-8) == 3);
}

TEST_CASE("check_commutes examples") {
  Rng rng(47, "commutes");
  const AntilinearOp any{rng.complex_matrix(3, 3)};
  CHECK(check_commutes(Matrix::identity(3), any).absolute < 1e-14);
  CHECK(check_commutes(Matrix::diagonal(Vector{1.0, 2.0}), AntilinearOp{Matrix::identity(2)}).absolute == 0.0);
  const auto r = check_commutes(Matrix::diagonal(Vector{I, 1.0}), AntilinearOp{Matrix::identity(2)});
  CHECK(r.absolute == doctest::Approx(2.0));
  CHECK_THROWS_AS(check_commutes(Matrix::identity(2), AntilinearOp{Matrix::identity(3)}), DimensionError);
}

TEST_CASE("check_involution examples") {
  CHECK(check_involution({Matrix::identity(3)}).absolute == 0.0);
  CHECK(check_involution({Matrix{{0.0, 1.0}, {1.0, 0.0}}}).absolute == 0.0);
  for (std::size_t n : {1u, 2u, 5u}) {
    const auto r = check_involution({2.0 * Matrix::identity(n)});
    CHECK(r.absolute == doctest::Approx(3.0 * std::sqrt(static_cast<double>(n))));
    CHECK(r.relative == doctest::Approx(3.0));
  }
  // i I squares to I under the antilinear action: (iI) conj(iI) = I
  CHECK(check_involution({I * Matrix::identity(2)}).absolute == 0.0);
}

TEST_CASE("canonical_t_selfadjoint examples") {
  ToleranceConfig cfg;
  CHECK(diff(canonical_t_selfadjoint(Matrix::diagonal(Vector{3.0, -1.0})).m, Matrix::identity(2)) < 1e-14);
  CHECK(diff(canonical_t_selfadjoint(Matrix{{0.0, 1.0}, {1.0, 0.0}}).m, Matrix::identity(2)) < 1e-12);
  const Matrix h{{2.0, I}, {-I, 2.0}};
  const auto t = canonical_t_selfadjoint(h);
  CHECK(is_hermitian(t));
  CHECK(diff(t.m * t.m.adjoint(), Matrix::identity(2)) <= 1e-10);
  CHECK(check_involution(t).absolute <= 1e-10);
  CHECK_THROWS_AS(canonical_t_selfadjoint(Matrix{{0.0, 1.0}, {0.0, 0.0}}), ValidationError);
  (void)cfg;
}

TEST_CASE("canonical_t_selfadjoint passes every residual on random Hermitian H") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Matrix h = oracle::gen({1 + s % 8, s, oracle::Kind::HermitianDense});
    const auto t = canonical_t_selfadjoint(h);
    CHECK(check_involution(t).relative <= 1e-9);
    CHECK(hermiticity_residual(t).relative <= 1e-9);
    CHECK(check_commutes(h, t).relative <= 1e-9);
    CHECK(check_pseudo_hermitian(h, t).relative <= 1e-9);
  }
}
