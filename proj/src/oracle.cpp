#include "symfact/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "symfact/rng.hpp"

namespace symfact::oracle {

namespace {

constexpr double kMinSeparation = 0.1;

Matrix symmetric_part(const Matrix& g) {
  Matrix c = g + g.transpose();
  c *= 0.5;
  return c;
}

Vector real_unit(Rng& rng, std::size_t n) {
  Vector v(n);
  for (auto& z : v) z = rng.normal();
  const double nv = norm(v);
  for (auto& z : v) z /= nv;
  return v;
}

Complex nonzero_scalar(Rng& rng) {
  const Complex z = rng.complex_normal();
  const double r = std::abs(z);
  return r == 0.0 ? Complex{1.0, 0.0} : z / r * (0.5 + r);
}

bool separated(std::span<const Complex> values, Complex z) {
  return std::all_of(values.begin(), values.end(),
                     [&](Complex w) { return std::abs(w - z) >= kMinSeparation; });
}

std::vector<Complex> paired_spectrum(Rng& rng, std::size_t n) {
  const std::size_t pairs = rng.index(n / 2 + 1);
  std::vector<Complex> values;
  while (values.size() < 2 * pairs) {
    const Complex z{rng.normal(), std::copysign(0.3 + std::abs(rng.normal()), rng.normal())};
    if (separated(values, z) && separated(values, std::conj(z))) {
      values.push_back(z);
      values.push_back(std::conj(z));
    }
  }
  while (values.size() < n) {
    const Complex z{2.0 * rng.normal(), 0.0};
    if (separated(values, z)) values.push_back(z);
  }
  return values;
}

// All imaginary parts lie in [0.3, 2.3], so no value has a conjugate partner.
std::vector<Complex> unpaired_spectrum(Rng& rng, std::size_t n) {
  std::vector<Complex> values;
  while (values.size() < n) {
    const Complex z{rng.normal(), rng.uniform(0.3, 2.3)};
    if (separated(values, z)) values.push_back(z);
  }
  return values;
}

void require_isotropic_dim(const GeneratorSpec& spec, std::size_t min_dim) {
  if (spec.dim < min_dim) {
    throw ValidationError("generate: " + std::string(to_string(spec.kind)) + " needs dim >= " +
                          std::to_string(min_dim));
  }
}

EigenPair planted_pair(Complex lambda, Vector e) { return {lambda, std::move(e), 0.0}; }

}  // namespace

std::string_view to_string(Kind k) {
  switch (k) {
    case Kind::DenseSymmetric: return "DenseSymmetric";
    case Kind::IsotropicLambdaZero: return "IsotropicLambdaZero";
    case Kind::IsotropicLambdaNonzero: return "IsotropicLambdaNonzero";
    case Kind::IsotropicMixed: return "IsotropicMixed";
    case Kind::PairedSpectrum: return "PairedSpectrum";
    case Kind::UnpairedSpectrum: return "UnpairedSpectrum";
    case Kind::HermitianDense: return "HermitianDense";
    case Kind::RankDeficient: return "RankDeficient";
  }
  return "?";
}

Vector isotropic_vector(std::size_t dim, std::uint64_t seed) {
  if (dim < 2) throw ValidationError("isotropic_vector: dim must be at least 2");
  Rng rng(seed, "oracle/isotropic");
  const Vector u = real_unit(rng, dim);
  Vector w;
  double nw = 0.0;
  // A Gaussian draw parallel to u has probability zero; retry anyway.
  while (nw < 1e-3) {
    w = real_unit(rng, dim);
    const double p = bilinear(u, w).real();
    for (std::size_t i = 0; i < dim; ++i) w[i] -= p * u[i];
    nw = norm(w);
  }
  Vector e(dim);
  const double s = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < dim; ++i) e[i] = s * Complex{u[i].real(), w[i].real() / nw};
  return e;
}

Matrix isotropic_lambda_zero(std::span<const Complex> e) { return outer(e, e); }

Matrix isotropic_lambda_nonzero(std::span<const Complex> e, Complex lambda) {
  const double n2 = norm(e) * norm(e);
  if (n2 == 0.0) throw ValidationError("isotropic_lambda_nonzero: zero vector");
  Vector f = conj(e);
  for (auto& z : f) z /= n2;
  Matrix c = outer(e, f) + outer(f, e);
  c *= lambda;
  return c;
}

Matrix gen_diagonalizable(std::span<const Complex> spectrum, std::uint64_t seed) {
  const std::size_t n = spectrum.size();
  if (n == 0) throw ValidationError("gen_diagonalizable: empty spectrum");
  Rng rng(seed, "oracle/similarity");
  Matrix s = rng.complex_matrix(n, n);
  s *= 0.5 / std::sqrt(static_cast<double>(n));
  s += Matrix::identity(n);
  Matrix x = s * Matrix::diagonal(spectrum);
  // H = X S^{-1}  <=>  S^T H^T = X^T
  return solve_linear(s.transpose(), x.transpose()).transpose();
}

Matrix cayley(const Matrix& s) {
  if (!s.square()) throw DimensionError("cayley: matrix must be square");
  const Matrix id = Matrix::identity(s.rows());
  // (I - S) and (I + S)^{-1} commute.
  return solve_linear(id + s, id - s);
}

Matrix gen_complex_orthogonal(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ValidationError("gen_complex_orthogonal: dim must be at least 1");
  Rng rng(seed, "oracle/orthogonal");
  const Matrix g = rng.complex_matrix(dim, dim);
  Matrix s = g - g.transpose();
  const double ns = s.frobenius_norm();
  if (ns == 0.0) return Matrix::identity(dim);
  s *= rng.uniform(0.3, 0.8) / ns;
  const Matrix id = Matrix::identity(dim);
  while (condition_estimate(id + s) > 1e6) s *= 0.5;
  return cayley(s);
}

Generated generate(const GeneratorSpec& spec) {
  if (spec.dim == 0) throw ValidationError("generate: dim must be at least 1");
  const std::size_t n = spec.dim;
  Rng rng(spec.seed, std::string("oracle/") + std::string(to_string(spec.kind)));
  switch (spec.kind) {
    case Kind::DenseSymmetric:
      return {symmetric_part(rng.complex_matrix(n, n)), std::nullopt};
    case Kind::HermitianDense: {
      const Matrix g = rng.complex_matrix(n, n);
      Matrix h = g + g.adjoint();
      h *= 0.5;
      return {std::move(h), std::nullopt};
    }
    case Kind::IsotropicLambdaZero: {
      require_isotropic_dim(spec, 2);
      Vector e = isotropic_vector(n, spec.seed);
      Matrix c = isotropic_lambda_zero(e);
      return {std::move(c), planted_pair(0.0, std::move(e))};
    }
    case Kind::IsotropicLambdaNonzero: {
      require_isotropic_dim(spec, 2);
      Vector e = isotropic_vector(n, spec.seed);
      const Complex lambda = nonzero_scalar(rng);
      Matrix c = isotropic_lambda_nonzero(e, lambda);
      return {std::move(c), planted_pair(lambda, std::move(e))};
    }
    case Kind::IsotropicMixed: {
      require_isotropic_dim(spec, 3);
      Vector e = isotropic_vector(n, spec.seed);
      const Complex lambda = nonzero_scalar(rng);
      const Matrix w = Matrix::from_columns(complement_basis_within(e));
      const Matrix k = symmetric_part(rng.complex_matrix(n - 2, n - 2));
      Matrix c = isotropic_lambda_nonzero(e, lambda) + w * k * w.transpose();
      return {std::move(c), planted_pair(lambda, std::move(e))};
    }
    case Kind::PairedSpectrum:
      return {gen_diagonalizable(paired_spectrum(rng, n), spec.seed), std::nullopt};
    case Kind::UnpairedSpectrum:
      return {gen_diagonalizable(unpaired_spectrum(rng, n), spec.seed), std::nullopt};
    case Kind::RankDeficient: {
      const std::size_t r = n == 1 ? 0 : 1 + rng.index(n - 1);
      if (r == 0) return {Matrix::zeros(n, n), std::nullopt};
      const Matrix v0 = rng.complex_matrix(n, r);
      return {v0 * v0.transpose(), std::nullopt};
    }
  }
  throw ValidationError("generate: unknown kind");
}

Matrix gen(const GeneratorSpec& spec) { return generate(spec).c; }

LdltResult ldlt_symmetric(const Matrix& c, double tol) {
  if (!c.square()) throw DimensionError("ldlt_symmetric: matrix must be square");
  const std::size_t n = c.rows();
  const double floor = tol * c.frobenius_norm();
  Matrix a = c;
  LdltFactors f{Matrix::identity(n), Vector(n), std::vector<std::size_t>(n)};
  for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    const double rest = a.block(k, k, n - k, n - k).frobenius_norm();
    if (rest <= floor) break;  // trailing block is zero: d stays 0
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, i)) > std::abs(a(p, p))) p = i;
    if (std::abs(a(p, p)) <= floor) return Breakdown{k, rest};
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      for (std::size_t i = 0; i < n; ++i) std::swap(a(i, k), a(i, p));
      for (std::size_t j = 0; j < k; ++j) std::swap(f.l(k, j), f.l(p, j));
      std::swap(f.perm[k], f.perm[p]);
    }
    const Complex d = a(k, k);
    f.d[k] = d;
    for (std::size_t i = k + 1; i < n; ++i) f.l(i, k) = a(i, k) / d;
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f.l(i, k) * a(k, j);
  }
  return f;
}

std::variant<Matrix, Breakdown> factor_via_ldlt(const Matrix& c, double tol) {
  LdltResult r = ldlt_symmetric(c, tol);
  if (auto* b = std::get_if<Breakdown>(&r)) return *b;
  const auto& f = std::get<LdltFactors>(r);
  const std::size_t n = c.rows();
  // Columns are permuted back as well, so a diagonal C gives a diagonal V.
  Matrix v(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j <= k; ++j) v(f.perm[k], f.perm[j]) = f.l(k, j) * principal_sqrt(f.d[j]);
  return v;
}

}  // namespace symfact::oracle
