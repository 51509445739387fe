#pragma once

// Constructive factorization C = V V^T of a complex symmetric matrix by
// induction on the dimension. Each level takes one eigenpair (C e = l e)
// and splits on whether e is isotropic (e^T e = 0):
//
//   CaseI   e^T e != 0: A = [basis of {w : e^T w = 0}, e] makes A^T C A
//           block diagonal, diag(c~, l).
//   CaseII  e^T e == 0: A' = [basis of V', conj(e), e] gives C' = A'^T C A'
//           whose last row/column vanish except C'(n, n+1) = l * alpha.
//           l == 0        -> C' = diag(c~', 0)
//           c~' != 0      -> A = A' D with D the bordered identity, again
//                            block diagonal diag(c~, l'^2)
//           c~' == 0      -> only the 2x2 antidiagonal corner survives.
//
// The factor is then V = (B A^{-1})^T with B^T B = A^T C A, computed by a
// pivoted solve of A^T V = B^T.

#include <optional>
#include <string_view>
#include <vector>

#include "symfact/eigen.hpp"
#include "symfact/matcore.hpp"

namespace symfact {

enum class Branch { Base, CaseI, CaseII_LambdaZero, CaseII_General, CaseII_Degenerate, ZeroMatrix };

/// How the free components x_1..x_{n-1} of D were chosen.
enum class XStrategy { None, Zero, UnitVector, Random, BestEffort };

std::string_view to_string(Branch b);
std::string_view to_string(XStrategy s);

struct TraceLevel {
  std::size_t dim = 0;
  Branch branch = Branch::Base;
  Complex lambda{};
  Complex ete{};                   ///< bilinear(e, e) for the unit eigenvector
  std::optional<double> alpha;     ///< conj(e)^T e, CaseII only
  std::optional<Complex> det_d;    ///< det D, CaseII_General only
  XStrategy x_strategy = XStrategy::None;
  double offblock = 0.0;           ///< norm of the entries the reduction should zero
};

struct RecursionTrace {
  std::vector<TraceLevel> levels;
  std::size_t count(Branch b) const;
};

struct FactorizationResult {
  Matrix v;
  double residual = 0.0;           ///< ||C - V V^T||_F
  double relative_residual = 0.0;  ///< residual / max(||C||_F, DBL_MIN)
  bool passed = false;             ///< relative_residual <= verify_tol
  RecursionTrace trace;
};

struct Verification {
  double residual = 0.0;
  double relative_residual = 0.0;
  bool passed = false;
};

/// Factors a complex symmetric C as V V^T. Throws NotSymmetricError when
/// ||C - C^T||_F > 1e-12 ||C||_F; inputs inside that band are symmetrized.
FactorizationResult factor_symmetric(const Matrix& c, const ToleranceConfig& cfg = {});

/// As factor_symmetric, but the top recursion level uses the supplied
/// eigenpair instead of calling the eigensolver. The pair is validated
/// (unit norm after rescaling, residual <= eig_tol ||C||_F).
FactorizationResult factor_symmetric_with(const Matrix& c, EigenPair top,
                                          const ToleranceConfig& cfg = {});

Verification verify_factorization(const Matrix& c, const Matrix& v, const ToleranceConfig& cfg = {});

/// V o for complex orthogonal o (o^T o = I within 1e-10); V o (V o)^T = V V^T.
Matrix orthogonal_gauge(const Matrix& v, const Matrix& o);

// ---------------------------------------------------------------------------
// Individual proof steps, exposed for testing and tracing.

/// Isotropy routing for a unit eigenvector. CaseII sub-branches are
/// resolved later (they depend on l and c~'), so any isotropic vector maps
/// to Branch::CaseII_General here.
Branch dispatch_case(std::span<const Complex> e, const ToleranceConfig& cfg);

struct CaseIReduction {
  Matrix a;        ///< columns: complement basis, then e rescaled to e^T e = 1
  Matrix reduced;  ///< A^T C A
  Matrix c_tilde;  ///< upper-left n x n block (symmetrized)
  Complex mu;      ///< bottom-right entry
  double offblock = 0.0;
};

CaseIReduction reduce_case_i(const Matrix& c, const EigenPair& pair);

/// V = (B A^{-1})^T with B = diag(v_tilde^T, principal_sqrt(mu)).
Matrix assemble_case_i(const Matrix& v_tilde, Complex mu, const Matrix& a);

struct CaseIIReduction {
  Matrix a_prime;        ///< columns: basis of V', conj(e), e  (unitary)
  Matrix c_prime;        ///< A'^T C A'
  Matrix c_tilde_prime;  ///< upper-left n x n block (symmetrized)
  Complex lambda_alpha;  ///< C'(n, n+1)
  double alpha = 1.0;    ///< conj(e)^T e for the unit e
  double offblock = 0.0; ///< entries (k, n+1), k < n, and (n+1, n+1)
};

CaseIIReduction reduce_case_ii(const Matrix& c, const EigenPair& pair, const ToleranceConfig& cfg);

struct XChoice {
  bool all_zero = false;  ///< c~' vanishes: det D == 0 for every x
  Vector x;               ///< length n, x_n = -(l alpha)^{-1}
  Complex det_d{};        ///< closed-form -sum x_i y_i
  XStrategy strategy = XStrategy::None;
};

/// y_i = sum_j c~'_{ij} x_j.
Vector border_y(const Matrix& c_tilde_prime, std::span<const Complex> x);
/// det D = -sum x_i y_i.
Complex det_d_closed_form(std::span<const Complex> x, std::span<const Complex> y);

/// Ladder: x_free = 0, unit vectors, then up to 16 seeded random draws.
/// `depth` salts the random stream so every recursion level draws
/// independently of scheduling.
XChoice choose_x(const Matrix& c_tilde_prime, Complex lambda_alpha, const ToleranceConfig& cfg,
                 std::size_t depth = 0);

/// (n+1) x (n+1) bordered identity: last column (x, 0), last row (y, 0).
Matrix build_d(std::span<const Complex> x, std::span<const Complex> y);

/// m with m^T m = [[0, la], [la, 0]]: m = [[1, la/2], [i, -i la/2]].
Matrix factor_antidiagonal(Complex lambda_alpha);

}  // namespace symfact
