#include "symfact/antilinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "symfact/factorization.hpp"

namespace symfact {

namespace {

constexpr double kSingularCondition = 1e12;
constexpr double kCoeffSymmetry = 1e-12;
constexpr double kSelfAdjointBand = 1e-12;

double safe(double x) { return std::max(x, std::numeric_limits<double>::min()); }

void check_shapes(const BiorthonormalSystem& sys, const std::vector<Matrix>& per_level, const char* what) {
  if (per_level.size() != sys.levels.size()) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(sys.levels.size()) +
                         " level matrices, got " + std::to_string(per_level.size()));
  }
  for (std::size_t k = 0; k < per_level.size(); ++k) {
    const std::size_t mu = sys.levels[k].multiplicity;
    if (per_level[k].rows() != mu || per_level[k].cols() != mu) {
      throw DimensionError(std::string(what) + ": level " + std::to_string(k) +
                           " needs a " + std::to_string(mu) + "x" + std::to_string(mu) + " matrix");
    }
  }
}

void require_invertible(const Matrix& m, const char* what) {
  if (!(condition_estimate(m) <= kSingularCondition)) {
    throw SingularMatrixError(std::string(what) + ": matrix is singular to working precision");
  }
}

}  // namespace

Vector apply(const AntilinearOp& op, std::span<const Complex> zeta) {
  return op.m * std::span<const Complex>(conj(zeta));
}

Vector apply_inverse(const AntilinearOp& op, std::span<const Complex> eta) {
  Matrix rhs(eta.size(), 1);
  rhs.set_col(0, eta);
  return conj(solve_linear(op.m, rhs).col(0));
}

Residual hermiticity_residual(const AntilinearOp& op) {
  const double abs = (op.m - op.m.transpose()).frobenius_norm();
  return {abs, abs / safe(op.m.frobenius_norm())};
}

bool is_hermitian(const AntilinearOp& op, double tol) {
  return hermiticity_residual(op).absolute <= tol * op.m.frobenius_norm();
}

CoefficientSet identity_coeffs(const BiorthonormalSystem& sys) {
  CoefficientSet c;
  for (const auto& lv : sys.levels) c.push_back(Matrix::identity(lv.multiplicity));
  return c;
}

AntilinearOp build_t(const BiorthonormalSystem& sys, const CoefficientSet& coeffs) {
  check_shapes(sys, coeffs, "build_t");
  Matrix m(sys.dim, sys.dim);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const Matrix& c = coeffs[k];
    if ((c - c.transpose()).frobenius_norm() > kCoeffSymmetry * c.frobenius_norm()) {
      throw ValidationError("build_t: coefficient matrix " + std::to_string(k) + " is not symmetric");
    }
    require_invertible(c, "build_t");
    const Matrix& phi = sys.levels[k].phi;
    m += phi * c * phi.transpose();
  }
  return {std::move(m)};
}

Residual check_pseudo_hermitian(const Matrix& h, const AntilinearOp& g) {
  if (!h.square() || h.rows() != g.m.rows()) throw DimensionError("check_pseudo_hermitian: shape mismatch");
  require_invertible(g.m, "check_pseudo_hermitian");
  const double abs = (h.adjoint() * g.m - g.m * h.conj()).frobenius_norm();
  return {abs, abs / safe(g.m.frobenius_norm() * h.frobenius_norm())};
}

Residual check_pseudo_hermitian(const Matrix& h, const Matrix& g) {
  if (!h.square() || h.rows() != g.rows()) throw DimensionError("check_pseudo_hermitian: shape mismatch");
  require_invertible(g, "check_pseudo_hermitian");
  const double abs = (h.adjoint() * g - g * h).frobenius_norm();
  return {abs, abs / safe(g.frobenius_norm() * h.frobenius_norm())};
}

BiorthonormalSystem transform_basis(const BiorthonormalSystem& sys, const BasisChange& v) {
  check_shapes(sys, v, "transform_basis");
  BiorthonormalSystem out = sys;
  for (std::size_t k = 0; k < v.size(); ++k) {
    LuDecomposition lu(v[k]);
    if (lu.singular()) throw SingularMatrixError("transform_basis: singular basis change");
    auto& lv = out.levels[k];
    lv.phi = sys.levels[k].phi * v[k];
    // Psi v^{-*}: solve v^* X^T... computed as (v^{-1} Psi^*)^* .
    lv.psi = solve_linear(v[k], sys.levels[k].psi.adjoint()).adjoint();
  }
  return out;
}

CoefficientSet transform_coeffs(const CoefficientSet& coeffs, const BasisChange& v) {
  if (coeffs.size() != v.size()) throw DimensionError("transform_coeffs: level count mismatch");
  CoefficientSet out;
  out.reserve(coeffs.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].square() || v[k].rows() != coeffs[k].rows()) {
      throw DimensionError("transform_coeffs: level " + std::to_string(k) + " shape mismatch");
    }
    LuDecomposition lu(v[k]);
    if (lu.singular()) throw SingularMatrixError("transform_coeffs: singular basis change");
    // v^{-1} c v^{-T} = v^{-1} (v^{-1} c^T)^T
    const Matrix left = lu.solve(coeffs[k].transpose());
    Matrix c = lu.solve(left.transpose());
    out.push_back(std::move(c));
  }
  return out;
}

CanonicalForm canonicalize(const BiorthonormalSystem& sys, const CoefficientSet& coeffs,
                           const ToleranceConfig& cfg) {
  check_shapes(sys, coeffs, "canonicalize");
  BasisChange v;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const Matrix& c = coeffs[k];
    require_invertible(c, "canonicalize");
    const std::size_t mu = c.rows();
    if ((c - Matrix::identity(mu)).frobenius_norm() <= 1e-12 * std::sqrt(static_cast<double>(mu))) {
      v.push_back(Matrix::identity(mu));
      continue;
    }
    FactorizationResult f = factor_symmetric(c, cfg);
    if (!f.passed) {
      throw Error("canonicalize: factorization of level " + std::to_string(k) +
                  " failed its residual check (" + std::to_string(f.relative_residual) + ")");
    }
    if (LuDecomposition(f.v).singular()) {
      throw SingularMatrixError("canonicalize: factor of an invertible coefficient matrix is singular");
    }
    v.push_back(std::move(f.v));
  }
  CanonicalForm out;
  out.system = transform_basis(sys, v);
  out.coeffs = transform_coeffs(coeffs, v);
  out.basis_change = std::move(v);
  out.op = build_t(out.system, identity_coeffs(out.system));
  return out;
}

std::variant<SpectrumPairing, Unpairable> spectrum_pairing(const std::vector<Complex>& values,
                                                           const std::vector<std::size_t>& mult,
                                                           double tol) {
  if (values.size() != mult.size()) throw DimensionError("spectrum_pairing: size mismatch");
  const std::size_t n = values.size();
  SpectrumPairing p{std::vector<std::size_t>(n, n), std::vector<bool>(n, false)};
  Unpairable bad;
  for (std::size_t i = 0; i < n; ++i) {
    if (p.partner[i] != n) continue;
    const Complex target = std::conj(values[i]);
    std::size_t best = n;
    double best_d = tol;
    for (std::size_t j = 0; j < n; ++j) {
      if (p.partner[j] != n || mult[j] != mult[i]) continue;
      const double d = std::abs(values[j] - target);
      if (d <= best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best == n) {
      bad.offending.push_back(values[i]);
      continue;
    }
    p.partner[i] = best;
    p.partner[best] = i;
    p.real[i] = p.real[best] = (best == i);
  }
  if (!bad.offending.empty()) return bad;
  return p;
}

std::variant<SpectrumPairing, Unpairable> spectrum_pairing(const BiorthonormalSystem& sys) {
  double scale = 1.0;
  for (const auto& lv : sys.levels) scale = std::max(scale, std::abs(lv.value));
  return spectrum_pairing(sys.level_values(), sys.multiplicities(), 1e-7 * scale);
}

AntilinearOp build_antilinear_symmetry(const BiorthonormalSystem& sys, const SpectrumPairing& pairing) {
  if (pairing.partner.size() != sys.levels.size()) {
    throw DimensionError("build_antilinear_symmetry: pairing does not match the system");
  }
  Matrix m(sys.dim, sys.dim);
  for (std::size_t k = 0; k < sys.levels.size(); ++k) {
    const auto& src = sys.levels[k];
    const auto& dst = sys.levels[pairing.partner[k]];
    if (src.multiplicity != dst.multiplicity) {
      throw DimensionError("build_antilinear_symmetry: paired levels differ in multiplicity");
    }
    m += dst.psi * src.phi.transpose();
  }
  return {std::move(m)};
}

Residual check_commutes(const Matrix& h, const AntilinearOp& op) {
  if (!h.square() || h.rows() != op.m.rows()) throw DimensionError("check_commutes: shape mismatch");
  const double abs = (h * op.m - op.m * h.conj()).frobenius_norm();
  return {abs, abs / safe(h.frobenius_norm() * op.m.frobenius_norm())};
}

Residual check_involution(const AntilinearOp& op) {
  const std::size_t n = op.m.rows();
  const double abs = (op.m * op.m.conj() - Matrix::identity(n)).frobenius_norm();
  return {abs, abs / std::sqrt(static_cast<double>(std::max<std::size_t>(n, 1)))};
}

AntilinearOp canonical_t_selfadjoint(const Matrix& h, const ToleranceConfig& cfg) {
  if (!h.square()) throw DimensionError("canonical_t_selfadjoint: matrix must be square");
  require_finite(h, "canonical_t_selfadjoint");
  const double skew = (h - h.adjoint()).frobenius_norm();
  if (skew > kSelfAdjointBand * h.frobenius_norm()) {
    throw ValidationError("canonical_t_selfadjoint: H is not self-adjoint");
  }
  Matrix herm = h + h.adjoint();
  herm *= 0.5;
  const BiorthonormalSystem sys = biorthonormal_system(herm, cfg);

  // Eigenspaces of a self-adjoint operator are mutually orthogonal, so
  // Gram-Schmidt in level order only removes rounding from psi.
  Matrix psi = sys.psi();
  const std::size_t n = psi.rows();
  for (std::size_t j = 0; j < n; ++j) {
    Vector v = psi.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t k = 0; k < j; ++k) {
        const Vector q = psi.col(k);
        const Complex d = sesquilinear(v, q);
        for (std::size_t i = 0; i < n; ++i) v[i] -= d * q[i];
      }
    const double nv = norm(v);
    for (auto& z : v) z /= nv;
    psi.set_col(j, v);
  }
  return {psi * psi.transpose()};
}

}  // namespace symfact
