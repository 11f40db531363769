#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

// Dense real linear algebra at desk scale (dimensions up to a few thousand),
// plus the linear-operator abstraction the solvers are written against.
// Row-major storage throughout; everything is immutable after construction
// and safe to share across threads.

namespace fr {

using Vec = std::vector<double>;

// Throws std::invalid_argument if any entry is NaN/Inf.
void require_finite(const Vec& v, const char* what);

struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;  // row-major, rows*cols entries

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
  // Validates the entry count and finiteness.
  DenseMatrix(std::size_t r, std::size_t c, std::vector<double> entries);

  double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

DenseMatrix identity_matrix(std::size_t n);
DenseMatrix transpose(const DenseMatrix& m);
DenseMatrix matmul(const DenseMatrix& x, const DenseMatrix& y);
Vec matvec(const DenseMatrix& m, const Vec& x);    // m * x
Vec matvec_t(const DenseMatrix& m, const Vec& x);  // m^T * x

double dot(const Vec& x, const Vec& y);
double norm2(const Vec& x);
double norm1(const Vec& x);
double norm_inf(const Vec& x);
// y += alpha * x
void axpy(double alpha, const Vec& x, Vec& y);
Vec scaled(const Vec& x, double alpha);
Vec vsub(const Vec& x, const Vec& y);
Vec vadd(const Vec& x, const Vec& y);

// ---------------------------------------------------------------------------
// Linear operators

class LinOp {
 public:
  virtual ~LinOp() = default;
  virtual std::size_t out_dim() const = 0;  // rows
  virtual std::size_t in_dim() const = 0;   // cols
  virtual Vec forward(const Vec& x) const = 0;
  virtual Vec adjoint(const Vec& y) const = 0;
  virtual const char* kind() const = 0;
};

using LinOpPtr = std::shared_ptr<const LinOp>;

LinOpPtr dense_op(DenseMatrix m);
// l2 applied after l1 (x -> l2(l1 x)).
LinOpPtr compose_op(LinOpPtr l2, LinOpPtr l1);
// [left right], splitting the input vector.
LinOpPtr hconcat_op(LinOpPtr left, LinOpPtr right);
// diag(top, bottom) acting on stacked vectors.
LinOpPtr blockdiag_op(LinOpPtr top, LinOpPtr bottom);
LinOpPtr scaled_identity_op(std::size_t n, double alpha);
// Swaps forward and adjoint.
LinOpPtr adjoint_op(LinOpPtr inner);
// [top; bottom] stacking outputs; built from hconcat and adjoint wrappers.
LinOpPtr vstack_op(LinOpPtr top, LinOpPtr bottom);

enum class ApplyMode { forward, adjoint };

// Dimension-checked application; the error message carries both dims.
Vec op_apply(const LinOp& op, const Vec& v, ApplyMode mode);
inline Vec op_apply(const LinOpPtr& op, const Vec& v, ApplyMode mode) {
  return op_apply(*op, v, mode);
}

// ---------------------------------------------------------------------------
// Factorizations and spectra

// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
// The factorization is done once and may be reused across right-hand sides.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const DenseMatrix& g);
  Vec solve(const Vec& b) const;
  std::size_t dim() const { return n_; }

 private:
  std::size_t n_;
  std::vector<double> l_;  // row-major lower triangle
};

// One-shot convenience: factor + solve.
Vec cholesky_solve(const DenseMatrix& g, const Vec& b);

struct EigResult {
  Vec values;           // descending
  DenseMatrix vectors;  // column j pairs with values[j]
};

// Cyclic Jacobi rotations; sweeps stop when the off-diagonal Frobenius mass
// falls below 1e-14 relative to the input norm. Intended for dimension <~ 200.
EigResult sym_eig(const DenseMatrix& s);

// Eigenvalues of the pencil (sa, sb) restricted to range(sb): whiten by the
// eigendecomposition of sb, discarding directions with sb-eigenvalue at or
// below null_tol * max. Returns a descending list; empty if sb is numerically
// zero. Throws if sb has an eigenvalue below -null_tol * max.
Vec generalized_sym_eig(const DenseMatrix& sa, const DenseMatrix& sb,
                        double null_tol);

// Largest singular value estimate by power iteration on L^T L from a seeded
// start; the Rayleigh quotient sequence is monotone nondecreasing in iters.
double power_iteration_norm(const LinOp& op, std::size_t iters,
                            std::uint64_t seed);

}  // namespace fr
