#pragma once

// Independent cross-checks and seeded input generators: a pivoted LDL^T
// factorizer, generators that force each recursion branch, and complex
// orthogonal matrices for gauge tests.

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "symfact/eigen.hpp"
#include "symfact/matcore.hpp"

namespace symfact::oracle {

enum class Kind {
  DenseSymmetric,          ///< (G + G^T)/2
  IsotropicLambdaZero,     ///< e e^T, isotropic e
  IsotropicLambdaNonzero,  ///< l (e f^T + f e^T), f = conj(e)/||e||^2
  IsotropicMixed,          ///< l (e f^T + f e^T) + W K W^T with W spanning V'
  PairedSpectrum,          ///< S diag(E) S^{-1}, E closed under conjugation
  UnpairedSpectrum,        ///< S diag(E) S^{-1}, some E without a conjugate partner
  HermitianDense,          ///< (G + G^*)/2
  RankDeficient,           ///< V0 V0^T, V0 tall and thin
};

std::string_view to_string(Kind k);

struct GeneratorSpec {
  std::size_t dim = 1;
  std::uint64_t seed = 0;
  Kind kind = Kind::DenseSymmetric;
};

struct Generated {
  Matrix c;
  /// Isotropic kinds: the eigenpair (l, e) the construction is built on.
  std::optional<EigenPair> planted;
};

/// Throws ValidationError for dim == 0, or dim == 1 with an isotropic kind.
Generated generate(const GeneratorSpec& spec);
Matrix gen(const GeneratorSpec& spec);

/// u + i w with real orthonormal u, w (so e^T e = 0 and ||e||^2 = 2),
/// scaled to unit norm. Requires dim >= 2.
Vector isotropic_vector(std::size_t dim, std::uint64_t seed);
Matrix isotropic_lambda_zero(std::span<const Complex> e);
Matrix isotropic_lambda_nonzero(std::span<const Complex> e, Complex lambda);

/// S diag(spectrum) S^{-1} with S = I + G / (2 sqrt n), G seeded Gaussian.
Matrix gen_diagonalizable(std::span<const Complex> spectrum, std::uint64_t seed);

/// Cayley transform (I - S)(I + S)^{-1} of a seeded complex antisymmetric S.
Matrix gen_complex_orthogonal(std::size_t dim, std::uint64_t seed);
/// Cayley transform of a given antisymmetric S.
Matrix cayley(const Matrix& s);

struct LdltFactors {
  Matrix l;                       ///< unit lower triangular, in pivoted order
  Vector d;
  std::vector<std::size_t> perm;  ///< row k of L corresponds to C row perm[k]
};

struct Breakdown {
  std::size_t step = 0;           ///< elimination step at which no pivot was admissible
  double remaining_norm = 0.0;    ///< Frobenius norm of the trailing block
};

using LdltResult = std::variant<LdltFactors, Breakdown>;

/// Symmetric LDL^T with largest-|diagonal| pivoting: P C P^T = L D L^T.
/// Breakdown when every remaining diagonal is <= tol * ||C||_F while the
/// remaining block exceeds that bound. Trailing blocks below the bound are
/// treated as zero (d = 0).
LdltResult ldlt_symmetric(const Matrix& c, double tol = 1e-12);

/// V = P^T L diag(principal_sqrt(d)) P, so V V^T = C.
std::variant<Matrix, Breakdown> factor_via_ldlt(const Matrix& c, double tol = 1e-12);

}  // namespace symfact::oracle
