#pragma once

// Antilinear operators on C^n, represented by the matrix M of the action
// zeta -> M conj(zeta). In this representation
//   Hermitian (X zeta, psi) = (X psi, zeta)   <=>  M = M^T
//   H^* = T H T^{-1}                           <=>  H^* M = M conj(H)
//   [H, X] = 0                                 <=>  H M = M conj(H)
//   X^2 = I                                    <=>  M conj(M) = I

#include <optional>
#include <variant>
#include <vector>

#include "symfact/eigen.hpp"
#include "symfact/matcore.hpp"

namespace symfact {

struct AntilinearOp {
  Matrix m;
};

/// One symmetric invertible mu_n x mu_n matrix c^(n) per eigenvalue level.
using CoefficientSet = std::vector<Matrix>;

/// Per-level invertible basis changes v^(n).
using BasisChange = std::vector<Matrix>;

struct Residual {
  double absolute = 0.0;
  double relative = 0.0;
};

Vector apply(const AntilinearOp& op, std::span<const Complex> zeta);
/// Inverse action eta -> conj(M^{-1} eta).
Vector apply_inverse(const AntilinearOp& op, std::span<const Complex> eta);

bool is_hermitian(const AntilinearOp& op, double tol = 1e-10);
/// ||M - M^T||_F (absolute) and divided by ||M||_F (relative).
Residual hermiticity_residual(const AntilinearOp& op);

/// Identity coefficients (the canonical choice) for every level of `sys`.
CoefficientSet identity_coeffs(const BiorthonormalSystem& sys);

/// T zeta = sum_n sum_ab c^(n)_ba (phi_{n,a}, zeta) phi_{n,b}, i.e.
/// M = sum_n Phi_n c^(n) Phi_n^T.
AntilinearOp build_t(const BiorthonormalSystem& sys, const CoefficientSet& coeffs);

/// H^* M - M conj(H), normalized by ||M||_F ||H||_F.
Residual check_pseudo_hermitian(const Matrix& h, const AntilinearOp& g);
/// Linear G: H^* G - G H, normalized by ||G||_F ||H||_F.
Residual check_pseudo_hermitian(const Matrix& h, const Matrix& g);

/// phi'_n = Phi_n v^(n), psi'_n = Psi_n (v^(n))^{-*}; keeps Phi'^* Psi' = I.
BiorthonormalSystem transform_basis(const BiorthonormalSystem& sys, const BasisChange& v);
/// c'^(n) = (v^(n))^{-1} c^(n) (v^(n))^{-T}.
CoefficientSet transform_coeffs(const CoefficientSet& coeffs, const BasisChange& v);

struct CanonicalForm {
  BiorthonormalSystem system;  ///< transformed basis
  CoefficientSet coeffs;       ///< transformed coefficients, identity up to rounding
  BasisChange basis_change;    ///< v^(n) with c^(n) = v^(n) v^(n)T
  AntilinearOp op;             ///< M = sum_n Phi'_n Phi'_n^T
};

/// Factors every c^(n) = v v^T and moves to the basis in which T has
/// identity coefficients. Levels whose coefficients are already the
/// identity (within 1e-12) are left untouched.
CanonicalForm canonicalize(const BiorthonormalSystem& sys, const CoefficientSet& coeffs,
                           const ToleranceConfig& cfg = {});

struct SpectrumPairing {
  std::vector<std::size_t> partner;  ///< nu(n)
  std::vector<bool> real;            ///< fixed points
};

struct Unpairable {
  std::vector<Complex> offending;
};

/// Involution nu with E_nu(n) = conj(E_n) and equal multiplicities, or
/// the eigenvalues that have no conjugate partner. `tol` is absolute.
std::variant<SpectrumPairing, Unpairable> spectrum_pairing(const std::vector<Complex>& values,
                                                           const std::vector<std::size_t>& mult,
                                                           double tol);
/// Uses tol = 1e-7 * max(1, max |E_n|).
std::variant<SpectrumPairing, Unpairable> spectrum_pairing(const BiorthonormalSystem& sys);

/// N = sum_n Psi_nu(n) Phi_n^T; commutes with H in the antilinear sense.
AntilinearOp build_antilinear_symmetry(const BiorthonormalSystem& sys, const SpectrumPairing& pairing);

/// H M - M conj(H), normalized by ||H||_F ||M||_F.
Residual check_commutes(const Matrix& h, const AntilinearOp& op);
/// M conj(M) - I, normalized by sqrt(n).
Residual check_involution(const AntilinearOp& op);

/// T = Psi Psi^T for an orthonormal eigenbasis of self-adjoint H; T^2 = I.
/// Throws ValidationError when ||H - H^*||_F > 1e-12 ||H||_F.
AntilinearOp canonical_t_selfadjoint(const Matrix& h, const ToleranceConfig& cfg = {});

}  // namespace symfact
