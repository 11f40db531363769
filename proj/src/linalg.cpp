#include "fr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fr/rng.hpp"

namespace fr {

void require_finite(const Vec& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(std::string(what) +
                                  ": non-finite entry not admitted");
    }
  }
}

DenseMatrix::DenseMatrix(std::size_t r, std::size_t c,
                         std::vector<double> entries)
    : rows(r), cols(c), a(std::move(entries)) {
  if (a.size() != rows * cols) {
    throw std::invalid_argument(
        "DenseMatrix: entry count " + std::to_string(a.size()) +
        " does not equal rows*cols = " + std::to_string(rows * cols));
  }
  require_finite(a, "DenseMatrix");
}

DenseMatrix identity_matrix(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix t(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) t.at(j, i) = m.at(i, j);
  return t;
}

DenseMatrix matmul(const DenseMatrix& x, const DenseMatrix& y) {
  if (x.cols != y.rows) {
    throw std::invalid_argument("matmul: inner dims " + std::to_string(x.cols) +
                                " vs " + std::to_string(y.rows));
  }
  DenseMatrix z(x.rows, y.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t k = 0; k < x.cols; ++k) {
      const double xik = x.at(i, k);
      if (xik == 0.0) continue;
      const double* yrow = &y.a[k * y.cols];
      double* zrow = &z.a[i * z.cols];
      for (std::size_t j = 0; j < y.cols; ++j) zrow[j] += xik * yrow[j];
    }
  }
  return z;
}

Vec matvec(const DenseMatrix& m, const Vec& x) {
  if (x.size() != m.cols) {
    throw std::invalid_argument("matvec: vector length " +
                                std::to_string(x.size()) + " vs cols " +
                                std::to_string(m.cols));
  }
  Vec y(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = &m.a[i * m.cols];
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

Vec matvec_t(const DenseMatrix& m, const Vec& x) {
  if (x.size() != m.rows) {
    throw std::invalid_argument("matvec_t: vector length " +
                                std::to_string(x.size()) + " vs rows " +
                                std::to_string(m.rows));
  }
  Vec y(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = &m.a[i * m.cols];
    for (std::size_t j = 0; j < m.cols; ++j) y[j] += row[j] * xi;
  }
  return y;
}

double dot(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

double norm1(const Vec& x) {
  double s = 0.0;
  for (double v : x) s += std::fabs(v);
  return s;
}

double norm_inf(const Vec& x) {
  double s = 0.0;
  for (double v : x) s = std::max(s, std::fabs(v));
  return s;
}

void axpy(double alpha, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vec scaled(const Vec& x, double alpha) {
  Vec y(x);
  for (double& v : y) v *= alpha;
  return y;
}

Vec vsub(const Vec& x, const Vec& y) {
  Vec z(x);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] -= y[i];
  return z;
}

Vec vadd(const Vec& x, const Vec& y) {
  Vec z(x);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += y[i];
  return z;
}

// ---------------------------------------------------------------------------
// Operator kinds

namespace {

class DenseOp final : public LinOp {
 public:
  explicit DenseOp(DenseMatrix m) : m_(std::move(m)) {}
  std::size_t out_dim() const override { return m_.rows; }
  std::size_t in_dim() const override { return m_.cols; }
  Vec forward(const Vec& x) const override { return matvec(m_, x); }
  Vec adjoint(const Vec& y) const override { return matvec_t(m_, y); }
  const char* kind() const override { return "dense"; }

 private:
  DenseMatrix m_;
};

class ComposeOp final : public LinOp {
 public:
  ComposeOp(LinOpPtr l2, LinOpPtr l1) : l2_(std::move(l2)), l1_(std::move(l1)) {
    if (l2_->in_dim() != l1_->out_dim()) {
      throw std::invalid_argument(
          "compose_op: inner dims " + std::to_string(l2_->in_dim()) + " vs " +
          std::to_string(l1_->out_dim()));
    }
  }
  std::size_t out_dim() const override { return l2_->out_dim(); }
  std::size_t in_dim() const override { return l1_->in_dim(); }
  Vec forward(const Vec& x) const override {
    return l2_->forward(l1_->forward(x));
  }
  Vec adjoint(const Vec& y) const override {
    return l1_->adjoint(l2_->adjoint(y));
  }
  const char* kind() const override { return "composition"; }

 private:
  LinOpPtr l2_, l1_;
};

class HConcatOp final : public LinOp {
 public:
  HConcatOp(LinOpPtr left, LinOpPtr right)
      : left_(std::move(left)), right_(std::move(right)) {
    if (left_->out_dim() != right_->out_dim()) {
      throw std::invalid_argument(
          "hconcat_op: output dims " + std::to_string(left_->out_dim()) +
          " vs " + std::to_string(right_->out_dim()));
    }
  }
  std::size_t out_dim() const override { return left_->out_dim(); }
  std::size_t in_dim() const override {
    return left_->in_dim() + right_->in_dim();
  }
  Vec forward(const Vec& x) const override {
    const std::size_t nl = left_->in_dim();
    Vec xl(x.begin(), x.begin() + nl);
    Vec xr(x.begin() + nl, x.end());
    Vec y = left_->forward(xl);
    axpy(1.0, right_->forward(xr), y);
    return y;
  }
  Vec adjoint(const Vec& y) const override {
    Vec zl = left_->adjoint(y);
    Vec zr = right_->adjoint(y);
    zl.insert(zl.end(), zr.begin(), zr.end());
    return zl;
  }
  const char* kind() const override { return "hconcat"; }

 private:
  LinOpPtr left_, right_;
};

class BlockDiagOp final : public LinOp {
 public:
  BlockDiagOp(LinOpPtr top, LinOpPtr bottom)
      : top_(std::move(top)), bottom_(std::move(bottom)) {}
  std::size_t out_dim() const override {
    return top_->out_dim() + bottom_->out_dim();
  }
  std::size_t in_dim() const override {
    return top_->in_dim() + bottom_->in_dim();
  }
  Vec forward(const Vec& x) const override {
    const std::size_t nt = top_->in_dim();
    Vec xt(x.begin(), x.begin() + nt);
    Vec xb(x.begin() + nt, x.end());
    Vec y = top_->forward(xt);
    Vec yb = bottom_->forward(xb);
    y.insert(y.end(), yb.begin(), yb.end());
    return y;
  }
  Vec adjoint(const Vec& y) const override {
    const std::size_t mt = top_->out_dim();
    Vec yt(y.begin(), y.begin() + mt);
    Vec yb(y.begin() + mt, y.end());
    Vec x = top_->adjoint(yt);
    Vec xb = bottom_->adjoint(yb);
    x.insert(x.end(), xb.begin(), xb.end());
    return x;
  }
  const char* kind() const override { return "blockdiag"; }

 private:
  LinOpPtr top_, bottom_;
};

class ScaledIdentityOp final : public LinOp {
 public:
  ScaledIdentityOp(std::size_t n, double alpha) : n_(n), alpha_(alpha) {}
  std::size_t out_dim() const override { return n_; }
  std::size_t in_dim() const override { return n_; }
  Vec forward(const Vec& x) const override { return scaled(x, alpha_); }
  Vec adjoint(const Vec& y) const override { return scaled(y, alpha_); }
  const char* kind() const override { return "scaled-identity"; }

 private:
  std::size_t n_;
  double alpha_;
};

class AdjointWrapperOp final : public LinOp {
 public:
  explicit AdjointWrapperOp(LinOpPtr inner) : inner_(std::move(inner)) {}
  std::size_t out_dim() const override { return inner_->in_dim(); }
  std::size_t in_dim() const override { return inner_->out_dim(); }
  Vec forward(const Vec& x) const override { return inner_->adjoint(x); }
  Vec adjoint(const Vec& y) const override { return inner_->forward(y); }
  const char* kind() const override { return "adjoint-wrapper"; }

 private:
  LinOpPtr inner_;
};

}  // namespace

LinOpPtr dense_op(DenseMatrix m) {
  return std::make_shared<DenseOp>(std::move(m));
}
LinOpPtr compose_op(LinOpPtr l2, LinOpPtr l1) {
  return std::make_shared<ComposeOp>(std::move(l2), std::move(l1));
}
LinOpPtr hconcat_op(LinOpPtr left, LinOpPtr right) {
  return std::make_shared<HConcatOp>(std::move(left), std::move(right));
}
LinOpPtr blockdiag_op(LinOpPtr top, LinOpPtr bottom) {
  return std::make_shared<BlockDiagOp>(std::move(top), std::move(bottom));
}
LinOpPtr scaled_identity_op(std::size_t n, double alpha) {
  return std::make_shared<ScaledIdentityOp>(n, alpha);
}
LinOpPtr adjoint_op(LinOpPtr inner) {
  return std::make_shared<AdjointWrapperOp>(std::move(inner));
}

LinOpPtr vstack_op(LinOpPtr top, LinOpPtr bottom) {
  // [T; B] = ([T^* B^*])^*
  return adjoint_op(
      hconcat_op(adjoint_op(std::move(top)), adjoint_op(std::move(bottom))));
}

Vec op_apply(const LinOp& op, const Vec& v, ApplyMode mode) {
  const std::size_t need =
      (mode == ApplyMode::forward) ? op.in_dim() : op.out_dim();
  if (v.size() != need) {
    throw std::invalid_argument(
        std::string("op_apply ") +
        (mode == ApplyMode::forward ? "forward" : "adjoint") +
        ": vector length " + std::to_string(v.size()) +
        " does not match operator dimension " + std::to_string(need) +
        " (operator is " + std::to_string(op.out_dim()) + "x" +
        std::to_string(op.in_dim()) + ")");
  }
  return (mode == ApplyMode::forward) ? op.forward(v) : op.adjoint(v);
}

// ---------------------------------------------------------------------------
// Cholesky

namespace {

void require_symmetric(const DenseMatrix& g, const char* what) {
  if (g.rows != g.cols) {
    throw std::invalid_argument(std::string(what) + ": matrix is " +
                                std::to_string(g.rows) + "x" +
                                std::to_string(g.cols) + ", not square");
  }
  double scale = 0.0;
  for (double v : g.a) scale = std::max(scale, std::fabs(v));
  const double tol = 1e-12 * (1.0 + scale);
  for (std::size_t i = 0; i < g.rows; ++i) {
    for (std::size_t j = i + 1; j < g.cols; ++j) {
      if (std::fabs(g.at(i, j) - g.at(j, i)) > tol) {
        throw std::invalid_argument(std::string(what) +
                                    ": matrix not symmetric at (" +
                                    std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      }
    }
  }
}

}  // namespace

CholeskyFactor::CholeskyFactor(const DenseMatrix& g) : n_(g.rows) {
  require_symmetric(g, "cholesky");
  l_.assign(n_ * n_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    double d = g.at(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l_[j * n_ + k] * l_[j * n_ + k];
    if (d <= 0.0) {
      throw std::invalid_argument(
          "cholesky: not positive definite at pivot " + std::to_string(j) +
          " (value " + std::to_string(d) + ")");
    }
    const double ljj = std::sqrt(d);
    l_[j * n_ + j] = ljj;
    for (std::size_t i = j + 1; i < n_; ++i) {
      double s = g.at(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l_[i * n_ + k] * l_[j * n_ + k];
      l_[i * n_ + j] = s / ljj;
    }
  }
}

Vec CholeskyFactor::solve(const Vec& b) const {
  if (b.size() != n_) {
    throw std::invalid_argument("cholesky solve: rhs length " +
                                std::to_string(b.size()) + " vs dim " +
                                std::to_string(n_));
  }
  Vec y(b);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = y[i];
    for (std::size_t k = 0; k < i; ++k) s -= l_[i * n_ + k] * y[k];
    y[i] = s / l_[i * n_ + i];
  }
  for (std::size_t ii = n_; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n_; ++k) s -= l_[k * n_ + ii] * y[k];
    y[ii] = s / l_[ii * n_ + ii];
  }
  return y;
}

Vec cholesky_solve(const DenseMatrix& g, const Vec& b) {
  return CholeskyFactor(g).solve(b);
}

// ---------------------------------------------------------------------------
// Cyclic Jacobi eigensolver

EigResult sym_eig(const DenseMatrix& s) {
  require_symmetric(s, "sym_eig");
  const std::size_t n = s.rows;
  DenseMatrix a = s;
  DenseMatrix v = identity_matrix(n);

  double base = 0.0;
  for (double x : s.a) base += x * x;
  base = std::sqrt(base);
  const double stop = 1e-14 * (base > 0.0 ? base : 1.0);

  auto offdiag = [&]() {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) sum += a.at(i, j) * a.at(i, j);
    return std::sqrt(2.0 * sum);
  };

  const std::size_t max_sweeps = 100;
  for (std::size_t sweep = 0; sweep < max_sweeps && offdiag() > stop; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (apq == 0.0) continue;
        const double app = a.at(p, p);
        const double aqq = a.at(q, q);
        // Stable rotation angle: t solves t^2 + 2t*theta - 1 = 0 with the
        // smaller-magnitude root, keeping |rotation| <= pi/4.
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0)
                             ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                             : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a.at(k, p);
          const double akq = a.at(k, q);
          a.at(k, p) = c * akp - sn * akq;
          a.at(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a.at(p, k);
          const double aqk = a.at(q, k);
          a.at(p, k) = c * apk - sn * aqk;
          a.at(q, k) = sn * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v.at(k, p);
          const double vkq = v.at(k, q);
          v.at(k, p) = c * vkp - sn * vkq;
          v.at(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a.at(i, i) > a.at(j, j);
  });

  EigResult r;
  r.values.resize(n);
  r.vectors = DenseMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    r.values[j] = a.at(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) r.vectors.at(i, j) = v.at(i, order[j]);
  }
  return r;
}

Vec generalized_sym_eig(const DenseMatrix& sa, const DenseMatrix& sb,
                        double null_tol) {
  require_symmetric(sa, "generalized_sym_eig (first)");
  require_symmetric(sb, "generalized_sym_eig (second)");
  if (sa.rows != sb.rows) {
    throw std::invalid_argument("generalized_sym_eig: dims " +
                                std::to_string(sa.rows) + " vs " +
                                std::to_string(sb.rows));
  }
  const EigResult eb = sym_eig(sb);
  const std::size_t n = sb.rows;
  const double wmax = eb.values.empty() ? 0.0 : eb.values[0];
  if (wmax <= 0.0) return {};  // numerically zero weight matrix
  for (double w : eb.values) {
    if (w < -null_tol * wmax) {
      throw std::invalid_argument(
          "generalized_sym_eig: weight matrix has negative eigenvalue " +
          std::to_string(w));
    }
  }

  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < n; ++j) {
    if (eb.values[j] > null_tol * wmax) keep.push_back(j);
  }
  if (keep.empty()) return {};

  // B = U_k diag(1/sqrt(w)); M = B^T Sa B restricted to the kept range.
  const std::size_t k = keep.size();
  DenseMatrix b(n, k);
  for (std::size_t jj = 0; jj < k; ++jj) {
    const double scale = 1.0 / std::sqrt(eb.values[keep[jj]]);
    for (std::size_t i = 0; i < n; ++i) {
      b.at(i, jj) = eb.vectors.at(i, keep[jj]) * scale;
    }
  }
  DenseMatrix m = matmul(transpose(b), matmul(sa, b));
  // Symmetrize away round-off before the Jacobi pass.
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double avg = 0.5 * (m.at(i, j) + m.at(j, i));
      m.at(i, j) = avg;
      m.at(j, i) = avg;
    }
  }
  return sym_eig(m).values;
}

double power_iteration_norm(const LinOp& op, std::size_t iters,
                            std::uint64_t seed) {
  if (iters < 1) throw std::invalid_argument("power_iteration_norm: iters >= 1");
  Rng rng(seed);
  Vec x(op.in_dim());
  for (double& v : x) v = rng.gaussian();
  double nx = norm2(x);
  if (nx == 0.0) return 0.0;
  for (double& v : x) v /= nx;

  double rayleigh = 0.0;
  for (std::size_t it = 0; it < iters; ++it) {
    Vec z = op.adjoint(op.forward(x));
    rayleigh = dot(x, z);
    const double nz = norm2(z);
    if (nz == 0.0) return 0.0;  // x in the null space; zero operator in practice
    for (std::size_t i = 0; i < z.size(); ++i) x[i] = z[i] / nz;
  }
  return std::sqrt(std::max(rayleigh, 0.0));
}

}  // namespace fr
