#include "symfact/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "symfact/rng.hpp"

namespace symfact {

namespace {

constexpr double kSymmetryBand = 1e-12;
// Sub-blocks below this fraction of ||C||_F are rounding residue of an
// exactly vanishing block and are factored as zero.
constexpr double kZeroBlock = 1e-14;
// |l alpha| at or below this fraction of ||C||_F takes the l = 0 route.
constexpr double kLambdaZero = 1e-12;
// c~' counts as the zero matrix when every entry is below this fraction of |l alpha|.
constexpr double kCoefficientZero = 1e-10;
constexpr int kRandomDraws = 16;
// Upper edge of the near-isotropic band in which a solver-chosen eigenvector
// is replaced by a better conditioned member of its eigenspace.
constexpr double kBoundaryBand = 1e-4;

Matrix symmetrized(const Matrix& m) {
  Matrix s = m + m.transpose();
  s *= 0.5;
  return s;
}

struct Context {
  const ToleranceConfig& cfg;
  double zero_floor;
  RecursionTrace& trace;
};

// Makes M = [[c~, b], [b^T, mu]] exactly block diagonal by the congruence
// P = [[I, 0], [-b^T / mu, 1]]: P^T M P = diag(c~ - b b^T / mu, mu). The
// off-diagonal block b is the eigenpair's rounding error, so P is a small
// perturbation of the identity; when |mu| does not dominate ||b|| the block
// is dropped instead.
void close_corner(Matrix& a, Matrix& c_tilde, const Matrix& reduced, Complex mu) {
  const std::size_t n = c_tilde.rows();
  Vector b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = 0.5 * (reduced(i, n) + reduced(n, i));
  const double nb = norm(b);
  if (nb == 0.0 || mu == Complex{} || nb > std::abs(mu)) return;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c_tilde(i, j) -= b[i] * b[j] / mu;
  for (std::size_t j = 0; j < n; ++j) {
    const Complex f = b[j] / mu;
    for (std::size_t r = 0; r < a.rows(); ++r) a(r, j) -= a(r, n) * f;
  }
}

// Eigenvectors with iso_tol < |e^T e| <= kBoundaryBand take CaseI with
// cond(A) ~ 1/|e^T e|. When the eigenspace has dimension >= 2 a better
// conditioned member is picked instead: the basis vector or pairwise
// combination n_i + s n_j (s in {1, i}) with the largest |x^T x|.
EigenPair widen_isotropy(const Matrix& c, const EigenPair& pair, const ToleranceConfig& cfg) {
  const double ete = std::abs(bilinear(pair.e, pair.e));
  if (ete <= cfg.iso_tol || ete > kBoundaryBand) return pair;
  Matrix shifted = c;
  for (std::size_t i = 0; i < c.rows(); ++i) shifted(i, i) -= pair.lambda;
  const Matrix basis = null_space(shifted);
  const std::size_t k = basis.cols();
  if (k < 2) return pair;

  std::vector<Vector> cols;
  for (std::size_t j = 0; j < k; ++j) cols.push_back(basis.col(j));
  Vector best = pair.e;
  double best_score = ete;
  auto consider = [&](Vector x) {
    const double nx = norm(x);
    if (nx == 0.0) return;
    for (auto& z : x) z /= nx;
    const double score = std::abs(bilinear(x, x));
    if (score > best_score) {
      best_score = score;
      best = std::move(x);
    }
  };
  for (std::size_t i = 0; i < k; ++i) {
    consider(cols[i]);
    for (std::size_t j = i + 1; j < k; ++j)
      for (Complex s : {Complex{1.0, 0.0}, Complex{0.0, 1.0}}) {
        Vector x = cols[i];
        for (std::size_t r = 0; r < x.size(); ++r) x[r] += s * cols[j][r];
        consider(std::move(x));
      }
  }
  if (best_score <= kBoundaryBand) return pair;

  const Vector cx = c * best;
  const Complex mu = sesquilinear(cx, best);
  Vector r = cx;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= mu * best[i];
  const double res = norm(r);
  if (res > cfg.eig_tol * c.frobenius_norm()) return pair;
  normalize_phase(best);
  return {mu, std::move(best), res};
}

// V = (B A^{-1})^T, i.e. the solution of A^T V = B^T.
Matrix factor_from(const Matrix& a, const Matrix& b) {
  return solve_linear(a.transpose(), b.transpose());
}

Matrix factor_level(const Matrix& c, Context& ctx, std::size_t depth, const EigenPair* forced);

Matrix case_ii(const Matrix& c, const EigenPair& pair, Context& ctx, std::size_t depth,
               std::size_t slot) {
  const std::size_t dim = c.rows();
  const std::size_t n = dim - 1;
  CaseIIReduction red = reduce_case_ii(c, pair, ctx.cfg);
  TraceLevel& lv = ctx.trace.levels[slot];
  lv.alpha = red.alpha;
  lv.offblock = red.offblock;

  if (std::abs(red.lambda_alpha) <= kLambdaZero * c.frobenius_norm()) {
    lv.branch = Branch::CaseII_LambdaZero;
    const Matrix v_tilde = factor_level(red.c_tilde_prime, ctx, depth + 1, nullptr);
    Matrix b(dim, dim);
    b.set_block(0, 0, v_tilde.transpose());
    return factor_from(red.a_prime, b);
  }

  const XChoice choice = choose_x(red.c_tilde_prime, red.lambda_alpha, ctx.cfg, depth);
  if (choice.all_zero) {
    ctx.trace.levels[slot].branch = Branch::CaseII_Degenerate;
    Matrix b(dim, dim);
    b.set_block(n - 1, n - 1, factor_antidiagonal(red.lambda_alpha));
    return factor_from(red.a_prime, b);
  }

  {
    TraceLevel& g = ctx.trace.levels[slot];
    g.branch = Branch::CaseII_General;
    g.det_d = choice.det_d;
    g.x_strategy = choice.strategy;
  }
  const Vector y = border_y(red.c_tilde_prime, choice.x);
  Matrix a = red.a_prime * build_d(choice.x, y);
  const Matrix reduced = a.transpose() * c * a;
  Matrix c_tilde = symmetrized(reduced.block(0, 0, n, n));
  const Complex mu = reduced(n, n);
  {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i) off += std::norm(reduced(i, n)) + std::norm(reduced(n, i));
    ctx.trace.levels[slot].offblock = std::max(ctx.trace.levels[slot].offblock, std::sqrt(off));
  }
  close_corner(a, c_tilde, reduced, mu);
  const Matrix v_tilde = factor_level(c_tilde, ctx, depth + 1, nullptr);
  return assemble_case_i(v_tilde, mu, a);
}

Matrix factor_level(const Matrix& c, Context& ctx, std::size_t depth, const EigenPair* forced) {
  const std::size_t dim = c.rows();
  const std::size_t slot = ctx.trace.levels.size();
  ctx.trace.levels.push_back({});
  ctx.trace.levels[slot].dim = dim;

  const double cnorm = c.frobenius_norm();
  if (cnorm == 0.0 || cnorm <= ctx.zero_floor) {
    ctx.trace.levels[slot].branch = Branch::ZeroMatrix;
    return Matrix(dim, dim);
  }
  if (dim == 1) {
    TraceLevel& lv = ctx.trace.levels[slot];
    lv.branch = Branch::Base;
    lv.lambda = c(0, 0);
    lv.ete = 1.0;
    return Matrix{{principal_sqrt(c(0, 0))}};
  }

  const EigenPair pair = forced ? *forced : widen_isotropy(c, eigenpair(c, ctx.cfg), ctx.cfg);
  {
    TraceLevel& lv = ctx.trace.levels[slot];
    lv.lambda = pair.lambda;
    lv.ete = bilinear(pair.e, pair.e);
  }
  if (dispatch_case(pair.e, ctx.cfg) == Branch::CaseI) {
    ctx.trace.levels[slot].branch = Branch::CaseI;
    CaseIReduction red = reduce_case_i(c, pair);
    ctx.trace.levels[slot].offblock = red.offblock;
    close_corner(red.a, red.c_tilde, red.reduced, red.mu);
    const Matrix v_tilde = factor_level(red.c_tilde, ctx, depth + 1, nullptr);
    return assemble_case_i(v_tilde, red.mu, red.a);
  }
  return case_ii(c, pair, ctx, depth, slot);
}

Matrix prepare_input(const Matrix& c, const ToleranceConfig& cfg) {
  cfg.validate();
  if (!c.square()) throw DimensionError("factor_symmetric: matrix must be square");
  if (c.rows() == 0) throw ValidationError("factor_symmetric: empty matrix");
  require_finite(c, "factor_symmetric");
  const double asym = (c - c.transpose()).frobenius_norm();
  if (asym > kSymmetryBand * c.frobenius_norm()) {
    throw NotSymmetricError("factor_symmetric: ||C - C^T||_F = " + std::to_string(asym) +
                            " exceeds the symmetrization band");
  }
  return asym > 0.0 ? symmetrized(c) : c;
}

FactorizationResult run(const Matrix& input, const Matrix& c, const ToleranceConfig& cfg,
                        const EigenPair* forced) {
  FactorizationResult out;
  Context ctx{cfg, kZeroBlock * c.frobenius_norm(), out.trace};
  out.v = factor_level(c, ctx, 0, forced);
  const Verification ver = verify_factorization(input, out.v, cfg);
  out.residual = ver.residual;
  out.relative_residual = ver.relative_residual;
  out.passed = ver.passed;
  return out;
}

}  // namespace

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::Base: return "Base";
    case Branch::CaseI: return "CaseI";
    case Branch::CaseII_LambdaZero: return "CaseII_LambdaZero";
    case Branch::CaseII_General: return "CaseII_General";
    case Branch::CaseII_Degenerate: return "CaseII_Degenerate";
    case Branch::ZeroMatrix: return "ZeroMatrix";
  }
  return "?";
}

std::string_view to_string(XStrategy s) {
  switch (s) {
    case XStrategy::None: return "none";
    case XStrategy::Zero: return "zero";
    case XStrategy::UnitVector: return "unit";
    case XStrategy::Random: return "random";
    case XStrategy::BestEffort: return "best_effort";
  }
  return "?";
}

std::size_t RecursionTrace::count(Branch b) const {
  return static_cast<std::size_t>(
      std::count_if(levels.begin(), levels.end(), [b](const TraceLevel& l) { return l.branch == b; }));
}

FactorizationResult factor_symmetric(const Matrix& c, const ToleranceConfig& cfg) {
  const Matrix sym = prepare_input(c, cfg);
  return run(c, sym, cfg, nullptr);
}

FactorizationResult factor_symmetric_with(const Matrix& c, EigenPair top, const ToleranceConfig& cfg) {
  const Matrix sym = prepare_input(c, cfg);
  require_finite(top.e, "factor_symmetric_with");
  if (top.e.size() != c.rows()) throw DimensionError("factor_symmetric_with: eigenvector length");
  const double ne = norm(top.e);
  if (ne == 0.0) throw ValidationError("factor_symmetric_with: zero eigenvector");
  for (auto& z : top.e) z /= ne;
  Vector r = sym * top.e;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= top.lambda * top.e[i];
  top.residual = norm(r);
  if (top.residual > cfg.eig_tol * sym.frobenius_norm()) {
    throw ValidationError("factor_symmetric_with: supplied pair is not an eigenpair of C");
  }
  return run(c, sym, cfg, &top);
}

Verification verify_factorization(const Matrix& c, const Matrix& v, const ToleranceConfig& cfg) {
  if (!c.square() || !v.square() || c.rows() != v.rows()) {
    throw DimensionError("verify_factorization: C and V must be square of equal dimension");
  }
  Verification out;
  out.residual = (c - v * v.transpose()).frobenius_norm();
  out.relative_residual =
      out.residual / std::max(c.frobenius_norm(), std::numeric_limits<double>::min());
  out.passed = out.relative_residual <= cfg.verify_tol;
  return out;
}

Matrix orthogonal_gauge(const Matrix& v, const Matrix& o) {
  if (!o.square() || v.cols() != o.rows()) throw DimensionError("orthogonal_gauge: shape mismatch");
  const double on = o.frobenius_norm();
  const double err = (o.transpose() * o - Matrix::identity(o.rows())).frobenius_norm();
  if (!(err <= 1e-10 * std::max(1.0, on * on))) {
    throw ValidationError("orthogonal_gauge: o^T o != I");
  }
  return v * o;
}

Branch dispatch_case(std::span<const Complex> e, const ToleranceConfig& cfg) {
  const double n = norm(e);
  return std::abs(bilinear(e, e)) > cfg.iso_tol * n * n ? Branch::CaseI : Branch::CaseII_General;
}

CaseIReduction reduce_case_i(const Matrix& c, const EigenPair& pair) {
  const std::size_t dim = c.rows();
  const std::size_t n = dim - 1;
  const Complex ete = bilinear(pair.e, pair.e);
  if (ete == Complex{}) throw ValidationError("reduce_case_i: isotropic eigenvector");
  const Vector e = scaled(pair.e, 1.0 / principal_sqrt(ete));  // e^T e = 1

  std::vector<Vector> cols = complement_basis(e);
  cols.push_back(e);
  CaseIReduction out;
  out.a = Matrix::from_columns(cols);
  out.reduced = out.a.transpose() * c * out.a;
  out.c_tilde = symmetrized(out.reduced.block(0, 0, n, n));
  out.mu = out.reduced(n, n);
  double off = 0.0;
  for (std::size_t i = 0; i < n; ++i) off += std::norm(out.reduced(i, n)) + std::norm(out.reduced(n, i));
  out.offblock = std::sqrt(off);
  return out;
}

Matrix assemble_case_i(const Matrix& v_tilde, Complex mu, const Matrix& a) {
  const std::size_t n = v_tilde.rows();
  if (!v_tilde.square() || !a.square() || a.rows() != n + 1) {
    throw DimensionError("assemble_case_i: shape mismatch");
  }
  Matrix b(n + 1, n + 1);
  b.set_block(0, 0, v_tilde.transpose());
  b(n, n) = principal_sqrt(mu);
  return factor_from(a, b);
}

CaseIIReduction reduce_case_ii(const Matrix& c, const EigenPair& pair, const ToleranceConfig& cfg) {
  const std::size_t dim = c.rows();
  const std::size_t n = dim - 1;
  Vector e = pair.e;
  const double ne = norm(e);
  for (auto& z : e) z /= ne;

  std::vector<Vector> cols = complement_basis_within(e, cfg.iso_tol);
  cols.push_back(conj(e));
  cols.push_back(e);
  CaseIIReduction out;
  out.a_prime = Matrix::from_columns(cols);
  out.c_prime = out.a_prime.transpose() * c * out.a_prime;
  out.c_tilde_prime = symmetrized(out.c_prime.block(0, 0, n, n));
  out.lambda_alpha = 0.5 * (out.c_prime(n - 1, n) + out.c_prime(n, n - 1));
  out.alpha = bilinear(conj(e), e).real();
  double off = std::norm(out.c_prime(n, n));
  for (std::size_t k = 0; k + 1 < n; ++k) off += std::norm(out.c_prime(k, n)) + std::norm(out.c_prime(n, k));
  out.offblock = std::sqrt(off);
  return out;
}

Vector border_y(const Matrix& c_tilde_prime, std::span<const Complex> x) {
  return c_tilde_prime * x;
}

Complex det_d_closed_form(std::span<const Complex> x, std::span<const Complex> y) {
  return -bilinear(x, y);
}

XChoice choose_x(const Matrix& c_tilde_prime, Complex lambda_alpha, const ToleranceConfig& cfg,
                 std::size_t depth) {
  const std::size_t n = c_tilde_prime.rows();
  if (n == 0 || !c_tilde_prime.square()) throw DimensionError("choose_x: c~' must be square and nonempty");
  if (lambda_alpha == Complex{}) throw ValidationError("choose_x: lambda * alpha must be nonzero");

  XChoice out;
  if (c_tilde_prime.max_abs() <= kCoefficientZero * std::abs(lambda_alpha)) {
    out.all_zero = true;
    return out;
  }

  const Complex xn = -1.0 / lambda_alpha;
  const double accept =
      cfg.det_tol * std::max(1.0, c_tilde_prime.frobenius_norm() / std::norm(lambda_alpha));

  XChoice best;
  double best_abs = -1.0;
  auto attempt = [&](Vector x, XStrategy strategy) {
    x.back() = xn;
    const Complex det = det_d_closed_form(x, border_y(c_tilde_prime, x));
    if (std::abs(det) > best_abs) {
      best_abs = std::abs(det);
      best = {false, x, det, strategy};
    }
    return std::abs(det) >= accept;
  };

  if (attempt(Vector(n), XStrategy::Zero)) return best;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    Vector x(n);
    x[i] = 1.0;
    if (attempt(std::move(x), XStrategy::UnitVector)) return best;
  }
  if (n > 1) {
    Rng rng(cfg.seed, "choose_x/depth-" + std::to_string(depth));
    for (int k = 0; k < kRandomDraws; ++k) {
      Vector x = rng.complex_vector(n);
      if (attempt(std::move(x), XStrategy::Random)) return best;
    }
  }
  if (best_abs == 0.0) {
    out.all_zero = true;
    return out;
  }
  best.strategy = XStrategy::BestEffort;
  return best;
}

Matrix build_d(std::span<const Complex> x, std::span<const Complex> y) {
  if (x.size() != y.size() || x.empty()) throw DimensionError("build_d: x and y must have equal nonzero length");
  const std::size_t n = x.size();
  Matrix d(n + 1, n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    d(i, i) = 1.0;
    d(i, n) = x[i];
    d(n, i) = y[i];
  }
  return d;
}

Matrix factor_antidiagonal(Complex lambda_alpha) {
  if (lambda_alpha == Complex{}) throw ValidationError("factor_antidiagonal: lambda * alpha must be nonzero");
  const Complex i(0.0, 1.0);
  return Matrix{{1.0, 0.5 * lambda_alpha}, {i, -0.5 * i * lambda_alpha}};
}

}  // namespace symfact
