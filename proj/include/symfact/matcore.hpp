#pragma once

// Dense complex linear algebra substrate: matrices, the bilinear and
// sesquilinear products, unitary completion of subspaces and pivoted LU.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "symfact/errors.hpp"

namespace symfact {

using Complex = std::complex<double>;
using Vector = std::vector<Complex>;

/// Numerical policy shared by every module.
struct ToleranceConfig {
  double eig_tol = 1e-10;     ///< relative eigenpair residual, ||Ce - le|| / ||C||_F
  double iso_tol = 1e-8;      ///< |e^T e| at or below this (for unit e) counts as isotropic
  double det_tol = 1e-6;      ///< acceptance threshold for |det D| (scaled)
  double verify_tol = 1e-8;   ///< relative Frobenius residual for a factorization to pass
  int max_qr_iters = 5000;    ///< total QR sweeps allowed per eigenvalue computation
  std::uint64_t seed = 20240607;

  /// Throws ValidationError unless all tolerances are positive and max_qr_iters >= 1.
  void validate() const;
};

/// Dense row-major complex matrix.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, Complex fill = {});
  Matrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static Matrix identity(std::size_t n);
  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
  static Matrix diagonal(std::span<const Complex> d);
  /// Matrix whose columns are the given vectors (all of equal length).
  static Matrix from_columns(const std::vector<Vector>& cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const Complex> data() const noexcept { return data_; }

  Vector col(std::size_t j) const;
  void set_col(std::size_t j, std::span<const Complex> v);
  /// Copy of the block [r0, r0+nr) x [c0, c0+nc).
  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const Matrix& b);

  Matrix transpose() const;
  Matrix adjoint() const;
  Matrix conj() const;

  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(Complex s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(Complex s, Matrix a);
Vector operator*(const Matrix& a, std::span<const Complex> x);

double norm(std::span<const Complex> v);
Vector conj(std::span<const Complex> v);
Vector scaled(std::span<const Complex> v, Complex s);
/// u v^T (no conjugation).
Matrix outer(std::span<const Complex> u, std::span<const Complex> v);

/// Non-conjugated product u^T v.
Complex bilinear(std::span<const Complex> u, std::span<const Complex> v);
/// Euclidean inner product (w1, w2) = w2^* w1, conjugate-linear in w2.
Complex sesquilinear(std::span<const Complex> w1, std::span<const Complex> w2);

/// Principal square root; Re(w) >= 0 and Im(w) >= 0 when Re(w) == 0.
Complex principal_sqrt(Complex z);

/// Orthonormal basis of the sesquilinear orthogonal complement of the
/// column span of `spanning` (columns must be linearly independent),
/// built from Householder reflectors.
std::vector<Vector> orthonormal_complement(const Matrix& spanning);

/// Basis of {w : e^T w = 0}, orthonormal under the sesquilinear product.
std::vector<Vector> complement_basis(std::span<const Complex> e);

/// Basis of {w : w^* e = 0 and w^* conj(e) = 0} for isotropic e (e^T e = 0).
/// Throws ValidationError if |e^T e| > iso_tol * ||e||^2.
std::vector<Vector> complement_basis_within(std::span<const Complex> e, double iso_tol = 1e-8);

/// Row-pivoted LU decomposition P A = L U, stored compactly.
class LuDecomposition {
public:
  /// Factors A. Pivots with modulus <= pivot_floor are replaced by
  /// pivot_floor (regularized factorization for shifted inverse iteration);
  /// with the default floor of 0 exact zeros are kept and flagged singular.
  explicit LuDecomposition(const Matrix& a, double pivot_floor = 0.0);

  /// True when some pivot is at or below n * eps * max|A|.
  bool singular() const noexcept { return singular_; }
  Complex determinant() const;
  /// Solves A X = B. Throws SingularMatrixError if singular().
  Matrix solve(const Matrix& b) const;
  Vector solve(std::span<const Complex> b) const;

private:
  void solve_in_place(Complex* x, std::size_t stride) const;

  std::size_t n_ = 0;
  Matrix lu_;
  std::vector<std::size_t> perm_;
  int sign_ = 1;
  bool singular_ = false;
};

/// X with A X = B by row-pivoted elimination; never forms A^{-1}.
Matrix solve_linear(const Matrix& a, const Matrix& b);
Complex determinant(const Matrix& a);
/// ||A||_1 ||A^{-1}||_1; +inf when A is singular to working precision.
double condition_estimate(const Matrix& a);

/// Numerical rank via complete-pivoting elimination; entries below
/// rel_tol * max|A| count as zero.
std::size_t numerical_rank(const Matrix& a, double rel_tol = 1e-10);
/// Columns spanning the numerical null space of A (possibly zero columns).
Matrix null_space(const Matrix& a, double rel_tol = 1e-10);

/// Throws ValidationError when any entry is NaN or Inf.
void require_finite(const Matrix& a, const char* what);
void require_finite(std::span<const Complex> v, const char* what);

}  // namespace symfact
