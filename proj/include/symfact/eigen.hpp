#pragma once

// Dense complex eigensolver: Householder Hessenberg reduction, single-shift
// QR for eigenvalues, shifted inverse iteration for eigenvectors, and the
// biorthonormal eigensystem {psi, phi} of a diagonalizable operator.

#include <vector>

#include "symfact/matcore.hpp"

namespace symfact {

struct EigenPair {
  Complex lambda;
  Vector e;         ///< unit sesquilinear norm, largest-modulus entry real positive
  double residual;  ///< ||A e - lambda e||_2
};

struct HessenbergForm {
  Matrix h;  ///< upper Hessenberg
  Matrix q;  ///< unitary, A = Q H Q^*
};

/// One eigenvalue level E_n of multiplicity mu_n.
struct EigenLevel {
  Complex value;
  std::size_t multiplicity;
  Matrix psi;  ///< mu_n eigenvector columns of H
  Matrix phi;  ///< mu_n dual columns, eigenvectors of H^*
};

struct BiorthonormalSystem {
  std::vector<EigenLevel> levels;
  std::size_t dim = 0;

  /// All psi columns, level by level.
  Matrix psi() const;
  /// All phi columns, level by level; phi()^* psi() = I.
  Matrix phi() const;
  std::vector<Complex> level_values() const;
  std::vector<std::size_t> multiplicities() const;
};

HessenbergForm hessenberg_reduce(const Matrix& a);

/// All n eigenvalues (with multiplicity) via Wilkinson-shifted QR on the
/// Hessenberg form. Throws ConvergenceError past cfg.max_qr_iters sweeps.
std::vector<Complex> eigenvalues(const Matrix& a, const ToleranceConfig& cfg = {});

/// A single eigenpair: the largest-modulus eigenvalue whose inverse
/// iteration converges to cfg.eig_tol * ||A||_F. Modulus ties are broken
/// by real part, then imaginary part, ascending.
EigenPair eigenpair(const Matrix& a, const ToleranceConfig& cfg = {});

/// Eigenvector by shifted inverse iteration started from a seeded vector.
/// Returns the refined pair (Rayleigh-quotient eigenvalue); residual may
/// exceed the tolerance if the iteration stagnated.
EigenPair inverse_iteration(const Matrix& a, Complex shift, const ToleranceConfig& cfg,
                            int max_steps = 12);

/// Absolute gap used to merge eigenvalues into one level: 1e-8 * ||H||_F.
double cluster_threshold(const Matrix& h);

/// Biorthonormal eigensystem. Throws DefectiveOperatorError when H has no
/// complete eigenbasis to working precision.
BiorthonormalSystem biorthonormal_system(const Matrix& h, const ToleranceConfig& cfg = {});

/// Gauge fix: scale v to unit norm with its first largest-modulus entry
/// real and positive.
void normalize_phase(Vector& v);

}  // namespace symfact
