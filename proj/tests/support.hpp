#pragma once

// Shared helpers for the unit tests: independent reference computations
// that do not go through the code under test.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

#include "symfact/matcore.hpp"

namespace symfact::test {

inline bool close(Complex a, Complex b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

inline double diff(const Matrix& a, const Matrix& b) { return (a - b).frobenius_norm(); }

/// Determinant by cofactor expansion; independent of the LU path.
inline Complex cofactor_det(const Matrix& a) {
  const std::size_t n = a.rows();
  if (n == 1) return a(0, 0);
  Complex sum{};
  for (std::size_t j = 0; j < n; ++j) {
    Matrix minor(n - 1, n - 1);
    for (std::size_t r = 1; r < n; ++r)
      for (std::size_t c = 0, k = 0; c < n; ++c)
        if (c != j) minor(r - 1, k++) = a(r, c);
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    sum += sign * a(0, j) * cofactor_det(minor);
  }
  return sum;
}

/// Monic characteristic polynomial coefficients [1, c1, ..., cn] of
/// det(zI - A) for n <= 3, from traces and the cofactor determinant.
inline std::vector<Complex> char_poly(const Matrix& a) {
  const std::size_t n = a.rows();
  Complex tr{};
  for (std::size_t i = 0; i < n; ++i) tr += a(i, i);
  if (n == 1) return {1.0, -tr};
  const Matrix a2 = a * a;
  Complex tr2{};
  for (std::size_t i = 0; i < n; ++i) tr2 += a2(i, i);
  const Complex e2 = 0.5 * (tr * tr - tr2);
  if (n == 2) return {1.0, -tr, e2};
  return {1.0, -tr, e2, -cofactor_det(a)};
}

inline Complex horner(const std::vector<Complex>& p, Complex z) {
  Complex v{};
  for (const Complex& c : p) v = v * z + c;
  return v;
}

/// Roots of a monic polynomial by Durand-Kerner, polished with Newton.
inline std::vector<Complex> poly_roots(const std::vector<Complex>& p) {
  const std::size_t n = p.size() - 1;
  if (n == 1) return {-p[1]};
  if (n == 2) {
    const Complex b = p[1];
    const Complex c = p[2];
    const Complex s = std::sqrt(b * b - 4.0 * c);
    const Complex q = -0.5 * (b + (std::real(std::conj(b) * s) >= 0 ? s : -s));
    if (q == Complex{}) return {0.0, 0.0};
    return {q, c / q};
  }
  double bound = 0.0;
  for (std::size_t k = 1; k <= n; ++k) bound = std::max(bound, std::abs(p[k]));
  const double r = 1.0 + bound;
  std::vector<Complex> z(n);
  const Complex seed(0.4, 0.9);
  for (std::size_t k = 0; k < n; ++k) z[k] = r * std::pow(seed, static_cast<double>(k));
  for (int it = 0; it < 2000; ++it) {
    double move = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      Complex den = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != k) den *= z[k] - z[j];
      if (den == Complex{}) den = 1e-300;
      const Complex step = horner(p, z[k]) / den;
      z[k] -= step;
      move = std::max(move, std::abs(step));
    }
    if (move <= 1e-15 * r) break;
  }
  return z;
}

/// Smallest max-distance over all pairings of two multisets (n <= 3).
inline double multiset_distance(std::vector<Complex> a, std::vector<Complex> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::vector<std::size_t> perm(b.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[perm[i]]));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Greedy nearest matching for larger multisets.
inline double greedy_distance(std::vector<Complex> a, std::vector<Complex> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const Complex& x : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [&](Complex p, Complex q) { return std::abs(p - x) < std::abs(q - x); });
    worst = std::max(worst, std::abs(*it - x));
    b.erase(it);
  }
  return worst;
}

}  // namespace symfact::test
