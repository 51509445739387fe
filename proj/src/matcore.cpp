#include "symfact/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

namespace symfact {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_same_dim(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw DimensionError(std::string(op) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

double norm1(const Matrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

void ToleranceConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(eig_tol) || !positive(iso_tol) || !positive(det_tol) || !positive(verify_tol)) {
    throw ValidationError("tolerances must be finite and strictly positive");
  }
  if (max_qr_iters < 1) throw ValidationError("max_qr_iters must be >= 1");
}

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, Complex fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<Complex>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const Complex> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::from_columns(const std::vector<Vector>& cols) {
  if (cols.empty()) return {};
  Matrix m(cols.front().size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) m.set_col(j, cols[j]);
  return m;
}

Vector Matrix::col(std::size_t j) const {
  Vector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

void Matrix::set_col(std::size_t j, std::span<const Complex> v) {
  require_same_dim(v.size(), rows_, "set_col");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) throw DimensionError("block out of range");
  Matrix b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
  if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) throw DimensionError("block out of range");
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::adjoint() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = std::conj((*this)(i, j));
  return t;
}

Matrix Matrix::conj() const {
  Matrix t(*this);
  for (auto& z : t.data_) z = std::conj(z);
  return t;
}

double Matrix::frobenius_norm() const {
  // Scaled accumulation keeps tiny and huge entries from under/overflowing.
  double scale = 0.0, ssq = 1.0;
  for (const auto& z : data_) {
    for (double part : {z.real(), z.imag()}) {
      const double a = std::abs(part);
      if (a == 0.0) continue;
      if (scale < a) {
        ssq = 1.0 + ssq * (scale / a) * (scale / a);
        scale = a;
      } else {
        ssq += (a / scale) * (a / scale);
      }
    }
  }
  return scale * std::sqrt(ssq);
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (const auto& z : data_) m = std::max(m, std::abs(z));
  return m;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("matrix +: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("matrix -: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(Complex s) {
  for (auto& z : data_) z *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Complex s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  require_same_dim(a.cols(), b.rows(), "matrix *");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Vector operator*(const Matrix& a, std::span<const Complex> x) {
  require_same_dim(a.cols(), x.size(), "matrix-vector *");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Complex s{};
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

// ---------------------------------------------------------------------------
// Vectors and products

double norm(std::span<const Complex> v) {
  Matrix m(v.size(), 1);
  m.set_col(0, v);
  return m.frobenius_norm();
}

Vector conj(std::span<const Complex> v) {
  Vector r(v.begin(), v.end());
  for (auto& z : r) z = std::conj(z);
  return r;
}

Vector scaled(std::span<const Complex> v, Complex s) {
  Vector r(v.begin(), v.end());
  for (auto& z : r) z *= s;
  return r;
}

Matrix outer(std::span<const Complex> u, std::span<const Complex> v) {
  Matrix m(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * v[j];
  return m;
}

Complex bilinear(std::span<const Complex> u, std::span<const Complex> v) {
  require_same_dim(u.size(), v.size(), "bilinear");
  Complex s{};
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

Complex sesquilinear(std::span<const Complex> w1, std::span<const Complex> w2) {
  require_same_dim(w1.size(), w2.size(), "sesquilinear");
  Complex s{};
  for (std::size_t i = 0; i < w1.size(); ++i) s += std::conj(w2[i]) * w1[i];
  return s;
}

Complex principal_sqrt(Complex z) {
  // std::sqrt on (-4, -0.0) lands on -2i; normalise onto the closed right
  // half-plane with the upper imaginary axis.
  Complex w = std::sqrt(z);
  if (w.real() < 0.0 || (w.real() == 0.0 && w.imag() < 0.0)) w = -w;
  if (w.real() == 0.0) w = Complex(0.0, w.imag());  // drop a signed -0.0
  return w;
}

// ---------------------------------------------------------------------------
// Unitary completion

std::vector<Vector> orthonormal_complement(const Matrix& spanning) {
  const std::size_t m = spanning.rows();
  const std::size_t k = spanning.cols();
  if (k > m) throw DimensionError("orthonormal_complement: more columns than rows");
  require_finite(spanning, "orthonormal_complement");

  Matrix x = spanning;
  Matrix q = Matrix::identity(m);
  const double scale = std::max(spanning.max_abs(), std::numeric_limits<double>::min());

  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t len = m - j;
    Vector v(len);
    for (std::size_t i = 0; i < len; ++i) v[i] = x(j + i, j);
    const double alpha = norm(v);
    if (alpha <= 64.0 * kEps * scale) {
      throw ValidationError("orthonormal_complement: spanning columns are linearly dependent");
    }
    const Complex phase = std::abs(v[0]) > 0.0 ? v[0] / std::abs(v[0]) : Complex(1.0);
    v[0] += phase * alpha;
    const double vn = norm(v);
    for (auto& z : v) z /= vn;

    // x <- (I - 2 v v^*) x on rows j.., columns j..
    for (std::size_t c = j; c < k; ++c) {
      Complex dot{};
      for (std::size_t i = 0; i < len; ++i) dot += std::conj(v[i]) * x(j + i, c);
      for (std::size_t i = 0; i < len; ++i) x(j + i, c) -= 2.0 * v[i] * dot;
    }
    // q <- q (I - 2 v v^*) on columns j..
    for (std::size_t r = 0; r < m; ++r) {
      Complex dot{};
      for (std::size_t i = 0; i < len; ++i) dot += q(r, j + i) * v[i];
      for (std::size_t i = 0; i < len; ++i) q(r, j + i) -= 2.0 * dot * std::conj(v[i]);
    }
  }

  std::vector<Vector> basis;
  basis.reserve(m - k);
  for (std::size_t c = k; c < m; ++c) basis.push_back(q.col(c));
  return basis;
}

std::vector<Vector> complement_basis(std::span<const Complex> e) {
  require_finite(e, "complement_basis");
  if (norm(e) == 0.0) throw ValidationError("complement_basis: zero vector");
  // {w : e^T w = 0} is the sesquilinear complement of conj(e).
  Matrix span(e.size(), 1);
  span.set_col(0, conj(e));
  return orthonormal_complement(span);
}

std::vector<Vector> complement_basis_within(std::span<const Complex> e, double iso_tol) {
  require_finite(e, "complement_basis_within");
  const double n = norm(e);
  if (n == 0.0) throw ValidationError("complement_basis_within: zero vector");
  if (std::abs(bilinear(e, e)) > iso_tol * n * n) {
    throw ValidationError("complement_basis_within: vector is not isotropic");
  }
  Matrix span(e.size(), 2);
  span.set_col(0, conj(e));
  span.set_col(1, e);
  return orthonormal_complement(span);
}

// ---------------------------------------------------------------------------
// LU

LuDecomposition::LuDecomposition(const Matrix& a, double pivot_floor)
    : n_(a.rows()), lu_(a), perm_(a.rows()) {
  if (!a.square()) throw DimensionError("LU: matrix must be square");
  require_finite(a, "LU");
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  const double tiny = static_cast<double>(std::max<std::size_t>(n_, 1)) * kEps * a.max_abs();

  for (std::size_t k = 0; k < n_; ++k) {
    std::size_t p = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n_; ++i) {
      const double v = std::abs(lu_(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (p != k) {
      for (std::size_t j = 0; j < n_; ++j) std::swap(lu_(k, j), lu_(p, j));
      std::swap(perm_[k], perm_[p]);
      sign_ = -sign_;
    }
    if (pivot_floor > 0.0 && std::abs(lu_(k, k)) <= pivot_floor) {
      lu_(k, k) = pivot_floor;
    }
    const Complex piv = lu_(k, k);
    if (piv == Complex{} || (pivot_floor == 0.0 && std::abs(piv) <= tiny)) {
      singular_ = true;
      if (piv == Complex{}) continue;
    }
    for (std::size_t i = k + 1; i < n_; ++i) {
      const Complex l = lu_(i, k) / piv;
      lu_(i, k) = l;
      if (l == Complex{}) continue;
      for (std::size_t j = k + 1; j < n_; ++j) lu_(i, j) -= l * lu_(k, j);
    }
  }
}

Complex LuDecomposition::determinant() const {
  Complex d = static_cast<double>(sign_);
  for (std::size_t k = 0; k < n_; ++k) d *= lu_(k, k);
  return d;
}

void LuDecomposition::solve_in_place(Complex* x, std::size_t stride) const {
  for (std::size_t i = 0; i < n_; ++i) {
    Complex s = x[i * stride];
    for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j * stride];
    x[i * stride] = s;
  }
  for (std::size_t ii = n_; ii-- > 0;) {
    Complex s = x[ii * stride];
    for (std::size_t j = ii + 1; j < n_; ++j) s -= lu_(ii, j) * x[j * stride];
    x[ii * stride] = s / lu_(ii, ii);
  }
}

Matrix LuDecomposition::solve(const Matrix& b) const {
  if (singular_) throw SingularMatrixError("solve: matrix is singular to working precision");
  require_same_dim(b.rows(), n_, "solve");
  Matrix x(n_, b.cols());
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) x(i, j) = b(perm_[i], j);
  std::vector<Complex> column(n_);
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < n_; ++i) column[i] = x(i, j);
    solve_in_place(column.data(), 1);
    for (std::size_t i = 0; i < n_; ++i) x(i, j) = column[i];
  }
  return x;
}

Vector LuDecomposition::solve(std::span<const Complex> b) const {
  if (singular_) throw SingularMatrixError("solve: matrix is singular to working precision");
  require_same_dim(b.size(), n_, "solve");
  Vector x(n_);
  for (std::size_t i = 0; i < n_; ++i) x[i] = b[perm_[i]];
  solve_in_place(x.data(), 1);
  return x;
}

Matrix solve_linear(const Matrix& a, const Matrix& b) {
  if (!a.square()) throw DimensionError("solve_linear: A must be square");
  require_finite(b, "solve_linear");
  return LuDecomposition(a).solve(b);
}

Complex determinant(const Matrix& a) {
  if (!a.square()) throw DimensionError("determinant: matrix must be square");
  return LuDecomposition(a).determinant();
}

double condition_estimate(const Matrix& a) {
  if (!a.square()) throw DimensionError("condition_estimate: matrix must be square");
  if (a.rows() == 0) return 1.0;
  LuDecomposition lu(a);
  if (lu.singular()) return std::numeric_limits<double>::infinity();
  const Matrix inv = lu.solve(Matrix::identity(a.rows()));
  return norm1(a) * norm1(inv);
}

// ---------------------------------------------------------------------------
// Rank and null space (Gauss-Jordan with complete pivoting)

namespace {

struct Rref {
  Matrix r;
  std::vector<std::size_t> pivot_cols;  // pivot column of row k
};

Rref reduce(const Matrix& a, double rel_tol) {
  Rref out{a, {}};
  Matrix& r = out.r;
  const std::size_t m = r.rows(), n = r.cols();
  const double thresh = rel_tol * a.max_abs();
  std::vector<bool> used(n, false);
  for (std::size_t row = 0; row < m; ++row) {
    std::size_t pi = row, pj = n;
    double best = 0.0;
    for (std::size_t i = row; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (used[j]) continue;
        const double v = std::abs(r(i, j));
        if (v > best) {
          best = v;
          pi = i;
          pj = j;
        }
      }
    if (pj == n || best <= thresh || best == 0.0) break;
    for (std::size_t j = 0; j < n; ++j) std::swap(r(row, j), r(pi, j));
    const Complex piv = r(row, pj);
    for (std::size_t j = 0; j < n; ++j) r(row, j) /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == row) continue;
      const Complex f = r(i, pj);
      if (f == Complex{}) continue;
      for (std::size_t j = 0; j < n; ++j) r(i, j) -= f * r(row, j);
    }
    used[pj] = true;
    out.pivot_cols.push_back(pj);
  }
  return out;
}

}  // namespace

std::size_t numerical_rank(const Matrix& a, double rel_tol) {
  if (a.empty()) return 0;
  return reduce(a, rel_tol).pivot_cols.size();
}

Matrix null_space(const Matrix& a, double rel_tol) {
  const std::size_t n = a.cols();
  if (a.empty()) return Matrix::identity(n);
  const Rref red = reduce(a, rel_tol);
  std::vector<bool> is_pivot(n, false);
  for (auto c : red.pivot_cols) is_pivot[c] = true;
  std::vector<Vector> basis;
  for (std::size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    Vector x(n);
    x[f] = 1.0;
    for (std::size_t k = 0; k < red.pivot_cols.size(); ++k) x[red.pivot_cols[k]] = -red.r(k, f);
    const double nx = norm(x);
    for (auto& z : x) z /= nx;
    basis.push_back(std::move(x));
  }
  if (basis.empty()) return Matrix(n, 0);
  return Matrix::from_columns(basis);
}

void require_finite(const Matrix& a, const char* what) {
  if (!a.all_finite()) throw ValidationError(std::string(what) + ": non-finite entry");
}

void require_finite(std::span<const Complex> v, const char* what) {
  for (const auto& z : v) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw ValidationError(std::string(what) + ": non-finite entry");
    }
  }
}

}  // namespace symfact
