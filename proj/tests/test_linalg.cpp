#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "fr/linalg.hpp"
#include "fr/rng.hpp"
#include "oracles.hpp"

using namespace fr;

namespace {

DenseMatrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  DenseMatrix m(r, c);
  Rng rng(seed);
  for (double& v : m.a) v = rng.gaussian();
  return m;
}

Vec random_vec(std::size_t n, std::uint64_t seed) {
  Vec v(n);
  Rng rng(seed);
  for (double& x : v) x = rng.gaussian();
  return v;
}

}  // namespace

TEST_CASE("matvec and matvec_t agree with hand-computed values") {
  DenseMatrix m(2, 3, {1, 2, 3, 4, 5, 6});
  const Vec x{1, 0, -1};
  const Vec y = matvec(m, x);
  REQUIRE(y.size() == 2);
  CHECK(y[0] == doctest::Approx(-2.0));
  CHECK(y[1] == doctest::Approx(-2.0));
  const Vec z = matvec_t(m, Vec{1, 1});
  REQUIRE(z.size() == 3);
  CHECK(z[0] == doctest::Approx(5.0));
  CHECK(z[1] == doctest::Approx(7.0));
  CHECK(z[2] == doctest::Approx(9.0));
}

TEST_CASE("matmul against an explicit product") {
  DenseMatrix a(2, 2, {1, 2, 3, 4});
  DenseMatrix b(2, 2, {0, 1, 1, 0});
  const DenseMatrix c = matmul(a, b);
  CHECK(c.at(0, 0) == doctest::Approx(2.0));
  CHECK(c.at(0, 1) == doctest::Approx(1.0));
  CHECK(c.at(1, 0) == doctest::Approx(4.0));
  CHECK(c.at(1, 1) == doctest::Approx(3.0));
}

TEST_CASE("dimension mismatches throw") {
  DenseMatrix m(2, 3);
  CHECK_THROWS_AS((void)matvec(m, Vec{1, 2}), std::invalid_argument);
  CHECK_THROWS_AS((void)matvec_t(m, Vec{1, 2, 3}), std::invalid_argument);
  DenseMatrix b(2, 2);
  CHECK_THROWS_AS((void)matmul(m, b), std::invalid_argument);
}

TEST_CASE("constructor validates entry count and finiteness") {
  CHECK_THROWS_AS(DenseMatrix(2, 2, {1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(DenseMatrix(1, 2, {1, std::nan("")}), std::invalid_argument);
}

TEST_CASE("vector helpers") {
  const Vec x{3, -4};
  CHECK(norm2(x) == doctest::Approx(5.0));
  CHECK(norm1(x) == doctest::Approx(7.0));
  CHECK(norm_inf(x) == doctest::Approx(4.0));
  CHECK(dot(x, Vec{1, 1}) == doctest::Approx(-1.0));
  Vec y{1, 1};
  axpy(2.0, x, y);
  CHECK(y[0] == doctest::Approx(7.0));
  CHECK(y[1] == doctest::Approx(-7.0));
  const Vec s = scaled(x, -1.0);
  CHECK(s[0] == doctest::Approx(-3.0));
  const Vec d = vsub(x, Vec{1, 1});
  CHECK(d[0] == doctest::Approx(2.0));
  CHECK(d[1] == doctest::Approx(-5.0));
  const Vec a = vadd(x, Vec{1, 1});
  CHECK(a[0] == doctest::Approx(4.0));
}

TEST_CASE("cholesky solve matches Gaussian elimination on a random SPD system") {
  const std::size_t n = 8;
  const DenseMatrix g0 = random_matrix(n, n, 31);
  // G = g0^T g0 + I is symmetric positive definite.
  DenseMatrix g = matmul(transpose(g0), g0);
  for (std::size_t i = 0; i < n; ++i) g.at(i, i) += 1.0;
  const Vec b = random_vec(n, 32);
  const Vec x = cholesky_solve(g, b);
  std::vector<double> xref;
  REQUIRE(oracle::solve_dense(g.a, b, n, xref));
  for (std::size_t i = 0; i < n; ++i)
    CHECK(x[i] == doctest::Approx(xref[i]).epsilon(1e-10));
  // The factor object is reusable across right-hand sides.
  CholeskyFactor chol(g);
  const Vec b2 = random_vec(n, 33);
  const Vec x2 = chol.solve(b2);
  std::vector<double> xref2;
  REQUIRE(oracle::solve_dense(g.a, b2, n, xref2));
  for (std::size_t i = 0; i < n; ++i)
    CHECK(x2[i] == doctest::Approx(xref2[i]).epsilon(1e-10));
}

TEST_CASE("cholesky rejects an indefinite matrix") {
  DenseMatrix g(2, 2, {1, 2, 2, 1});  // eigenvalues 3 and -1
  CHECK_THROWS_AS(CholeskyFactor{g}, std::invalid_argument);
}

TEST_CASE("sym_eig matches closed-form eigenvalues of a 3x3 matrix") {
  DenseMatrix s(3, 3, {2, 1, 0, 1, 3, 1, 0, 1, 2});
  const EigResult e = sym_eig(s);
  REQUIRE(e.values.size() == 3);
  const auto [lo, hi] = oracle::sym_eig_minmax_small(s.a, 3);
  CHECK(e.values.front() == doctest::Approx(hi).epsilon(1e-12));
  CHECK(e.values.back() == doctest::Approx(lo).epsilon(1e-12));
  // Descending order.
  CHECK(e.values[0] >= e.values[1]);
  CHECK(e.values[1] >= e.values[2]);
}

TEST_CASE("sym_eig reconstructs the matrix from its decomposition") {
  const std::size_t n = 6;
  const DenseMatrix g0 = random_matrix(n, n, 77);
  DenseMatrix s = matmul(transpose(g0), g0);
  const EigResult e = sym_eig(s);
  // S == V diag(w) V^T entrywise.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        acc += e.vectors.at(i, k) * e.values[k] * e.vectors.at(j, k);
      CHECK(acc == doctest::Approx(s.at(i, j)).epsilon(1e-9));
    }
  // Columns are orthonormal.
  for (std::size_t k = 0; k < n; ++k) {
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      nrm += e.vectors.at(i, k) * e.vectors.at(i, k);
    CHECK(nrm == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("generalized eigenvalues against a diagonal pencil") {
  // sa = diag(2, 6), sb = diag(1, 2) -> pencil eigenvalues {2, 3}.
  DenseMatrix sa(2, 2, {2, 0, 0, 6});
  DenseMatrix sb(2, 2, {1, 0, 0, 2});
  const Vec vals = generalized_sym_eig(sa, sb, 1e-10);
  REQUIRE(vals.size() == 2);
  CHECK(vals[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(vals[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("generalized eigenvalues restrict to the range of sb") {
  // sb has a one-dimensional null space; the pencil must ignore it.
  DenseMatrix sa(2, 2, {5, 0, 0, 9});
  DenseMatrix sb(2, 2, {1, 0, 0, 0});
  const Vec vals = generalized_sym_eig(sa, sb, 1e-10);
  REQUIRE(vals.size() == 1);
  CHECK(vals[0] == doctest::Approx(5.0).epsilon(1e-12));
  // A numerically zero sb yields no eigenvalues at all.
  DenseMatrix zero(2, 2);
  CHECK(generalized_sym_eig(sa, zero, 1e-10).empty());
}

TEST_CASE("linear operators satisfy the adjoint identity") {
  const DenseMatrix a = random_matrix(4, 6, 11);
  const DenseMatrix b = random_matrix(6, 5, 12);
  const LinOpPtr op = compose_op(dense_op(a), dense_op(b));  // A * B, 4 x 5
  CHECK(op->out_dim() == 4);
  CHECK(op->in_dim() == 5);
  const Vec x = random_vec(5, 13);
  const Vec y = random_vec(4, 14);
  const double lhs = dot(op->forward(x), y);
  const double rhs = dot(x, op->adjoint(y));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("hconcat, vstack, blockdiag, and scaled identity shapes and adjoints") {
  const DenseMatrix a = random_matrix(3, 4, 21);
  const DenseMatrix b = random_matrix(3, 2, 22);
  const LinOpPtr h = hconcat_op(dense_op(a), dense_op(b));
  CHECK(h->out_dim() == 3);
  CHECK(h->in_dim() == 6);
  const Vec xin = random_vec(6, 23);
  const Vec yout = random_vec(3, 24);
  CHECK(dot(h->forward(xin), yout) ==
        doctest::Approx(dot(xin, h->adjoint(yout))).epsilon(1e-12));

  const LinOpPtr v = vstack_op(dense_op(a), dense_op(random_matrix(2, 4, 25)));
  CHECK(v->out_dim() == 5);
  CHECK(v->in_dim() == 4);
  const Vec x2 = random_vec(4, 26);
  const Vec y2 = random_vec(5, 27);
  CHECK(dot(v->forward(x2), y2) ==
        doctest::Approx(dot(x2, v->adjoint(y2))).epsilon(1e-12));

  const LinOpPtr bd =
      blockdiag_op(dense_op(a), dense_op(random_matrix(2, 2, 28)));
  CHECK(bd->out_dim() == 5);
  CHECK(bd->in_dim() == 6);
  const Vec x3 = random_vec(6, 29);
  const Vec y3 = random_vec(5, 30);
  CHECK(dot(bd->forward(x3), y3) ==
        doctest::Approx(dot(x3, bd->adjoint(y3))).epsilon(1e-12));

  const LinOpPtr sid = scaled_identity_op(4, -2.5);
  const Vec x4 = random_vec(4, 31);
  const Vec fwd = sid->forward(x4);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(fwd[i] == doctest::Approx(-2.5 * x4[i]));

  const LinOpPtr adj = adjoint_op(dense_op(a));
  CHECK(adj->out_dim() == 4);
  CHECK(adj->in_dim() == 3);
  const Vec x5 = random_vec(3, 32);
  const Vec ref = matvec_t(a, x5);
  const Vec got = adj->forward(x5);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(got[i] == doctest::Approx(ref[i]));
}

TEST_CASE("op_apply validates dimensions with a helpful error") {
  const LinOpPtr op = dense_op(random_matrix(3, 4, 41));
  CHECK_THROWS_AS((void)op_apply(op, Vec{1, 2, 3}, ApplyMode::forward),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)op_apply(op, Vec{1, 2, 3, 4}, ApplyMode::adjoint),
                  std::invalid_argument);
  CHECK(op_apply(op, Vec{1, 2, 3, 4}, ApplyMode::forward).size() == 3);
}

TEST_CASE("power iteration estimates the spectral norm of a known operator") {
  // diag(3, 1, 0.5) has operator norm 3.
  DenseMatrix d(3, 3);
  d.at(0, 0) = 3.0;
  d.at(1, 1) = 1.0;
  d.at(2, 2) = 0.5;
  const LinOpPtr op = dense_op(d);
  const double nrm = power_iteration_norm(*op, 200, 5);
  CHECK(nrm == doctest::Approx(3.0).epsilon(1e-8));
  // Estimates from below: never above the true norm by more than roundoff.
  CHECK(nrm <= 3.0 + 1e-9);
}

TEST_CASE("require_finite rejects NaN and infinity") {
  CHECK_NOTHROW(require_finite(Vec{1.0, -2.0}, "v"));
  CHECK_THROWS_AS(require_finite(Vec{std::nan("")}, "v"), std::invalid_argument);
  CHECK_THROWS_AS(require_finite(Vec{INFINITY}, "v"), std::invalid_argument);
}
