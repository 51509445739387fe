#include "symfact/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "symfact/rng.hpp"

namespace symfact {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
// Eigenvalues this close (relative to ||A||_F) may be one defective eigenvalue.
constexpr double kDefectRadius = 1e-5;
// Deflation: |h(k+1,k)| <= kDeflate * (|h(k,k)| + |h(k+1,k+1)|).
constexpr double kDeflate = 1e-14;
constexpr double kDefectiveCondition = 1e8;
constexpr double kLevelResidual = 1e-8;

void require_square(const Matrix& a, const char* what) {
  if (!a.square()) throw DimensionError(std::string(what) + ": matrix must be square");
  require_finite(a, what);
}

// Both eigenvalues of [[a, b], [c, d]], computed without cancellation in
// the larger root.
std::pair<Complex, Complex> eig2x2(Complex a, Complex b, Complex c, Complex d) {
  const Complex half_tr = 0.5 * (a + d);
  const Complex half_diff = 0.5 * (a - d);
  const Complex disc = std::sqrt(half_diff * half_diff + b * c);
  const Complex l1 = std::abs(half_tr + disc) >= std::abs(half_tr - disc) ? half_tr + disc
                                                                          : half_tr - disc;
  const Complex det = a * d - b * c;
  const Complex l2 = l1 != Complex{} ? det / l1 : half_tr - (l1 - half_tr);
  return {l1, l2};
}

// Modified Gram-Schmidt, applied twice; columns that collapse are replaced
// by fresh directions from `rng`.
void orthonormalize_columns(Matrix& x, Rng& rng) {
  const std::size_t n = x.rows();
  for (std::size_t j = 0; j < x.cols(); ++j) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      Vector v = x.col(j);
      const double before = norm(v);
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t k = 0; k < j; ++k) {
          const Vector q = x.col(k);
          const Complex d = sesquilinear(v, q);
          for (std::size_t i = 0; i < n; ++i) v[i] -= d * q[i];
        }
      const double after = norm(v);
      if (after > 1e-10 * before && after > 0.0) {
        for (auto& z : v) z /= after;
        x.set_col(j, v);
        break;
      }
      x.set_col(j, rng.complex_vector(n));
    }
  }
}

Matrix shifted(const Matrix& a, Complex shift) {
  Matrix s = a;
  for (std::size_t i = 0; i < a.rows(); ++i) s(i, i) -= shift;
  return s;
}

// Fixed candidate order for eigenpair(): modulus descending, with values
// whose moduli agree to a relative 1e-12 ordered by real then imaginary part.
std::vector<Complex> selection_order(std::vector<Complex> vals) {
  std::sort(vals.begin(), vals.end(),
            [](const Complex& x, const Complex& y) { return std::abs(x) > std::abs(y); });
  double top = vals.empty() ? 0.0 : std::abs(vals.front());
  const double tie = 1e-12 * std::max(top, std::numeric_limits<double>::min());
  std::size_t start = 0;
  while (start < vals.size()) {
    std::size_t end = start + 1;
    while (end < vals.size() && std::abs(vals[start]) - std::abs(vals[end]) <= tie) ++end;
    std::sort(vals.begin() + static_cast<std::ptrdiff_t>(start),
              vals.begin() + static_cast<std::ptrdiff_t>(end),
              [](const Complex& x, const Complex& y) {
                if (x.real() != y.real()) return x.real() < y.real();
                return x.imag() < y.imag();
              });
    start = end;
  }
  return vals;
}

// Mean of the single-linkage cluster (gap `radius`) containing `lambda`,
// taken as (tr A - sum of the eigenvalues outside the cluster) / m. The
// outside eigenvalues are separated and accurate, while the QR values
// inside a defective cluster can drift far more than their exact sum.
Complex cluster_mean(const Matrix& a, const std::vector<Complex>& vals, Complex lambda,
                     double radius) {
  std::vector<bool> in(vals.size(), false);
  std::vector<Complex> members{lambda};
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (in[i]) continue;
      const bool near = std::any_of(members.begin(), members.end(),
                                    [&](Complex m) { return std::abs(vals[i] - m) <= radius; });
      if (!near) continue;
      in[i] = true;
      grew = true;
      members.push_back(vals[i]);
    }
  }
  const auto m = static_cast<std::size_t>(std::count(in.begin(), in.end(), true));
  if (m <= 1) return lambda;
  Complex rest = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) rest += a(i, i);
  for (std::size_t i = 0; i < vals.size(); ++i)
    if (!in[i]) rest -= vals[i];
  return rest / static_cast<double>(m);
}

}  // namespace

void normalize_phase(Vector& v) {
  const double n = norm(v);
  if (n == 0.0) return;
  std::size_t k = 0;
  double best = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double m = std::abs(v[i]);
    if (m > best * (1.0 + 1e-12)) {
      best = m;
      k = i;
    }
  }
  const Complex phase = std::conj(v[k]) / (std::abs(v[k]) * n);
  for (auto& z : v) z *= phase;
  v[k] = Complex(v[k].real(), 0.0);
}

// ---------------------------------------------------------------------------

HessenbergForm hessenberg_reduce(const Matrix& a) {
  require_square(a, "hessenberg_reduce");
  const std::size_t n = a.rows();
  Matrix h = a;
  Matrix q = Matrix::identity(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t len = n - k - 1;
    Vector v(len);
    for (std::size_t i = 0; i < len; ++i) v[i] = h(k + 1 + i, k);
    const double alpha = norm(v);
    double tail = 0.0;
    for (std::size_t i = 1; i < len; ++i) tail += std::norm(v[i]);
    if (alpha == 0.0 || tail == 0.0) continue;
    const Complex phase = std::abs(v[0]) > 0.0 ? v[0] / std::abs(v[0]) : Complex(1.0);
    v[0] += phase * alpha;
    const double vn = norm(v);
    for (auto& z : v) z /= vn;

    // h <- P h P with P = I - 2 v v^* acting on indices k+1..n-1.
    for (std::size_t c = 0; c < n; ++c) {
      Complex dot{};
      for (std::size_t i = 0; i < len; ++i) dot += std::conj(v[i]) * h(k + 1 + i, c);
      for (std::size_t i = 0; i < len; ++i) h(k + 1 + i, c) -= 2.0 * v[i] * dot;
    }
    for (std::size_t r = 0; r < n; ++r) {
      Complex dot{};
      for (std::size_t i = 0; i < len; ++i) dot += h(r, k + 1 + i) * v[i];
      for (std::size_t i = 0; i < len; ++i) h(r, k + 1 + i) -= 2.0 * dot * std::conj(v[i]);
      Complex qdot{};
      for (std::size_t i = 0; i < len; ++i) qdot += q(r, k + 1 + i) * v[i];
      for (std::size_t i = 0; i < len; ++i) q(r, k + 1 + i) -= 2.0 * qdot * std::conj(v[i]);
    }
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = Complex{};
  }
  return {std::move(h), std::move(q)};
}

std::vector<Complex> eigenvalues(const Matrix& a, const ToleranceConfig& cfg) {
  require_square(a, "eigenvalues");
  const std::size_t n = a.rows();
  std::vector<Complex> w(n);
  if (n == 0) return w;
  Matrix h = hessenberg_reduce(a).h;
  const double hnorm = h.frobenius_norm();
  if (hnorm == 0.0) return w;

  std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(n) - 1;
  int iter = 0;
  int total = 0;
  std::vector<std::pair<double, Complex>> rot;
  while (hi >= 0) {
    if (hi == 0) {
      w[0] = h(0, 0);
      break;
    }
    std::ptrdiff_t l = hi;
    for (; l > 0; --l) {
      const double sub = std::abs(h(l, l - 1));
      const double diag = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
      if (sub <= kDeflate * diag || sub <= kEps * hnorm) {
        h(l, l - 1) = Complex{};
        break;
      }
    }
    if (l == hi) {
      w[hi] = h(hi, hi);
      --hi;
      iter = 0;
      continue;
    }
    if (l == hi - 1) {
      auto [l1, l2] = eig2x2(h(hi - 1, hi - 1), h(hi - 1, hi), h(hi, hi - 1), h(hi, hi));
      w[hi - 1] = l1;
      w[hi] = l2;
      hi -= 2;
      iter = 0;
      continue;
    }
    if (++total > cfg.max_qr_iters) {
      throw ConvergenceError("eigenvalues: QR iteration did not converge in " +
                             std::to_string(cfg.max_qr_iters) + " sweeps");
    }
    ++iter;

    Complex mu;
    if (iter % 10 == 0) {
      mu = h(hi, hi) + 0.75 * std::abs(h(hi, hi - 1)) * Complex(1.0, 0.5);
    } else {
      auto [l1, l2] = eig2x2(h(hi - 1, hi - 1), h(hi - 1, hi), h(hi, hi - 1), h(hi, hi));
      mu = std::abs(l1 - h(hi, hi)) <= std::abs(l2 - h(hi, hi)) ? l1 : l2;
    }

    // Explicit shifted QR sweep on the active window [l, hi].
    const auto lo = static_cast<std::size_t>(l);
    const auto top = static_cast<std::size_t>(hi);
    for (std::size_t k = lo; k <= top; ++k) h(k, k) -= mu;
    rot.clear();
    for (std::size_t k = lo; k < top; ++k) {
      const Complex x = h(k, k), y = h(k + 1, k);
      const double r = std::hypot(std::abs(x), std::abs(y));
      double c = 1.0;
      Complex s{};
      if (r != 0.0) {
        if (x == Complex{}) {
          c = 0.0;
          s = std::conj(y) / std::abs(y);
        } else {
          c = std::abs(x) / r;
          s = (x / std::abs(x)) * std::conj(y) / r;
        }
      }
      rot.emplace_back(c, s);
      for (std::size_t j = k; j <= top; ++j) {
        const Complex t1 = h(k, j), t2 = h(k + 1, j);
        h(k, j) = c * t1 + s * t2;
        h(k + 1, j) = -std::conj(s) * t1 + c * t2;
      }
    }
    for (std::size_t k = lo; k < top; ++k) {
      const auto [c, s] = rot[k - lo];
      const std::size_t last = std::min(k + 2, top);
      for (std::size_t i = lo; i <= last; ++i) {
        const Complex t1 = h(i, k), t2 = h(i, k + 1);
        h(i, k) = t1 * c + t2 * std::conj(s);
        h(i, k + 1) = -t1 * s + t2 * c;
      }
    }
    for (std::size_t k = lo; k <= top; ++k) h(k, k) += mu;
  }
  return w;
}

EigenPair inverse_iteration(const Matrix& a, Complex shift, const ToleranceConfig& cfg,
                            int max_steps) {
  require_square(a, "inverse_iteration");
  const std::size_t n = a.rows();
  const double anorm = a.frobenius_norm();
  const double floor = std::max(kEps * anorm, std::numeric_limits<double>::min());
  const LuDecomposition lu(shifted(a, shift), floor);

  Rng rng(cfg.seed, "inverse-iteration");
  Vector x = rng.complex_vector(n);
  {
    const double nx = norm(x);
    for (auto& z : x) z /= nx;
  }

  EigenPair best{shift, x, std::numeric_limits<double>::infinity()};
  const double target = cfg.eig_tol * anorm;
  int since_converged = 0;
  for (int step = 0; step < max_steps; ++step) {
    Vector y = lu.solve(x);
    const double ny = norm(y);
    if (!(ny > 0.0) || !std::isfinite(ny)) break;
    for (auto& z : y) z /= ny;
    x = std::move(y);
    const Vector ax = a * x;
    const Complex mu = sesquilinear(ax, x);
    Vector r = ax;
    for (std::size_t i = 0; i < n; ++i) r[i] -= mu * x[i];
    const double res = norm(r);
    if (res < best.residual) best = {mu, x, res};
    if (best.residual <= target) {
      // A couple of extra sweeps polish the vector well below the tolerance.
      if (++since_converged >= 2 || best.residual <= 1e-3 * target) break;
    }
  }
  normalize_phase(best.e);
  return best;
}

namespace {

// Column j vanishing off the diagonal makes the axis e_j an exact eigenvector
// for a_jj; taking it avoids the rounding inverse iteration would add.
std::vector<std::size_t> isolated_axes(const Matrix& a, Complex lambda, double tol) {
  std::vector<std::size_t> out;
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) {
    if (std::abs(a(j, j) - lambda) > tol) continue;
    bool isolated = true;
    for (std::size_t i = 0; i < n && isolated; ++i) isolated = i == j || a(i, j) == Complex{};
    if (isolated) out.push_back(j);
  }
  return out;
}

std::optional<EigenPair> axis_eigenpair(const Matrix& a, Complex lambda) {
  const auto axes = isolated_axes(a, lambda, 1e-12 * std::max(std::abs(lambda), a.max_abs()));
  if (axes.empty()) return std::nullopt;
  Vector e(a.rows());
  e[axes.front()] = 1.0;
  return EigenPair{a(axes.front(), axes.front()), std::move(e), 0.0};
}

}  // namespace

EigenPair eigenpair(const Matrix& a, const ToleranceConfig& cfg) {
  require_square(a, "eigenpair");
  const double anorm = a.frobenius_norm();
  if (a.rows() == 0 || anorm == 0.0) throw ValidationError("eigenpair: matrix must be nonzero");
  const double target = cfg.eig_tol * anorm;

  const std::vector<Complex> vals = eigenvalues(a, cfg);
  const std::vector<Complex> order = selection_order(vals);
  for (const Complex& lambda : order) {
    if (auto axis = axis_eigenpair(a, lambda)) return *axis;
    // A defective eigenvalue comes back split by about eps^(1/k) while the
    // mean of its split cluster stays accurate, so the mean is tried first.
    std::vector<Complex> shifts;
    const Complex mean = cluster_mean(a, vals, lambda, kDefectRadius * anorm);
    if (mean != lambda) shifts.push_back(mean);
    shifts.push_back(lambda);
    for (const Complex& centre : shifts) {
      // Retry ladder for stagnation: exact shift, then two perturbed shifts.
      const double scale = std::max(std::abs(centre), anorm);
      for (double bump : {0.0, 1e-10, 1e-7}) {
        const Complex shift = centre + bump * scale * Complex(1.0, 1.0);
        EigenPair p = inverse_iteration(a, shift, cfg);
        if (p.residual <= target) return p;
      }
    }
  }
  throw ConvergenceError("eigenpair: inverse iteration failed for every eigenvalue candidate");
}

double cluster_threshold(const Matrix& h) { return 1e-8 * h.frobenius_norm(); }

Matrix BiorthonormalSystem::psi() const {
  Matrix m(dim, dim);
  std::size_t c = 0;
  for (const auto& lv : levels) {
    m.set_block(0, c, lv.psi);
    c += lv.multiplicity;
  }
  return m;
}

Matrix BiorthonormalSystem::phi() const {
  Matrix m(dim, dim);
  std::size_t c = 0;
  for (const auto& lv : levels) {
    m.set_block(0, c, lv.phi);
    c += lv.multiplicity;
  }
  return m;
}

std::vector<Complex> BiorthonormalSystem::level_values() const {
  std::vector<Complex> v;
  for (const auto& lv : levels) v.push_back(lv.value);
  return v;
}

std::vector<std::size_t> BiorthonormalSystem::multiplicities() const {
  std::vector<std::size_t> v;
  for (const auto& lv : levels) v.push_back(lv.multiplicity);
  return v;
}

BiorthonormalSystem biorthonormal_system(const Matrix& h, const ToleranceConfig& cfg) {
  require_square(h, "biorthonormal_system");
  const std::size_t n = h.rows();
  BiorthonormalSystem sys;
  sys.dim = n;
  if (n == 0) return sys;
  const double hnorm = h.frobenius_norm();
  if (hnorm == 0.0) {
    sys.levels.push_back({Complex{}, n, Matrix::identity(n), Matrix::identity(n)});
    return sys;
  }

  // Single-linkage clustering of the spectrum.
  const std::vector<Complex> vals = eigenvalues(h, cfg);
  const double gap = cluster_threshold(h);
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(vals[i] - vals[j]) <= gap) parent[find(i)] = find(j);

  struct Cluster {
    Complex mean;
    std::size_t size = 0;
  };
  std::vector<Cluster> clusters;
  std::vector<std::ptrdiff_t> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<std::ptrdiff_t>(clusters.size());
      clusters.push_back({});
    }
    auto& c = clusters[static_cast<std::size_t>(slot[r])];
    c.mean += vals[i];
    ++c.size;
  }
  for (auto& c : clusters) c.mean /= static_cast<double>(c.size);
  std::sort(clusters.begin(), clusters.end(), [](const Cluster& x, const Cluster& y) {
    if (x.mean.real() != y.mean.real()) return x.mean.real() < y.mean.real();
    return x.mean.imag() < y.mean.imag();
  });

  // Eigenspace of each level by block inverse iteration.
  const double floor = std::max(kEps * hnorm, std::numeric_limits<double>::min());
  Rng rng(cfg.seed, "biorthonormal");
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    const auto& cl = clusters[k];
    Rng level_rng = rng.split("level-" + std::to_string(k));
    const std::vector<std::size_t> axes = isolated_axes(h, cl.mean, gap);
    if (axes.size() == cl.size) {
      Matrix x(n, cl.size);
      for (std::size_t a = 0; a < axes.size(); ++a) x(axes[a], a) = 1.0;
      sys.levels.push_back({cl.mean, cl.size, x, Matrix{}});
      continue;
    }
    const LuDecomposition lu(shifted(h, cl.mean), floor);
    Matrix x = level_rng.complex_matrix(n, cl.size);
    orthonormalize_columns(x, level_rng);
    double res = std::numeric_limits<double>::infinity();
    for (int step = 0; step < 10; ++step) {
      x = lu.solve(x);
      orthonormalize_columns(x, level_rng);
      // ||H X - E X|| with E = tr(X^* H X) / mu; a Jordan chain spans an
      // invariant subspace but fails this test.
      const Matrix hx = h * x;
      const Matrix rq = x.adjoint() * hx;
      Complex e{};
      for (std::size_t i = 0; i < cl.size; ++i) e += rq(i, i);
      e /= static_cast<double>(cl.size);
      res = (hx - e * x).frobenius_norm();
      if (step >= 1 && res <= 1e-3 * cfg.eig_tol * hnorm) break;
    }
    if (res > kLevelResidual * hnorm) {
      throw DefectiveOperatorError("biorthonormal_system: eigenvalue " + std::to_string(cl.mean.real()) +
                                   (cl.mean.imag() < 0 ? "" : "+") + std::to_string(cl.mean.imag()) +
                                   "i has a deficient eigenspace");
    }
    if (cl.size == 1) {
      Vector v = x.col(0);
      normalize_phase(v);
      x.set_col(0, v);
    }
    sys.levels.push_back({cl.mean, cl.size, x, Matrix{}});
  }

  const Matrix psi = sys.psi();
  const double cond = condition_estimate(psi);
  if (!(cond <= kDefectiveCondition)) {
    throw DefectiveOperatorError("biorthonormal_system: eigenvector matrix condition " +
                                 std::to_string(cond) + " exceeds 1e8");
  }
  const Matrix phi = solve_linear(psi, Matrix::identity(n)).adjoint();
  std::size_t c = 0;
  for (auto& lv : sys.levels) {
    lv.phi = phi.block(0, c, n, lv.multiplicity);
    // E_n = tr(Phi_n^* H Psi_n) / mu_n
    const Matrix proj = lv.phi.adjoint() * h * lv.psi;
    Complex tr{};
    for (std::size_t i = 0; i < lv.multiplicity; ++i) tr += proj(i, i);
    lv.value = tr / static_cast<double>(lv.multiplicity);
    c += lv.multiplicity;
  }
  return sys;
}

}  // namespace symfact
