#include "fr/frame.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "fr/market.hpp"
#include "fr/rng.hpp"

namespace fr {
namespace {

constexpr double kTightnessBudget = 1e-10;

// Orthonormal columns from a seeded Gaussian draw: modified Gram-Schmidt with
// one reorthogonalization pass, which keeps ||Q^T Q - I|| at rounding level.
// Normalizing against the positive column norm fixes the sign convention, so
// the result is Haar-distributed over the orthogonal group.
DenseMatrix random_orthogonal(std::size_t n, Rng& rng) {
  // Columns are generated and orthogonalized one at a time.
  std::vector<Vec> cols(n, Vec(n));
  for (std::size_t j = 0; j < n; ++j) {
    Vec& q = cols[j];
    for (int attempt = 0; attempt < 64; ++attempt) {
      for (std::size_t i = 0; i < n; ++i) q[i] = rng.gaussian();
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < j; ++k) {
          const double c = dot(q, cols[k]);
          axpy(-c, cols[k], q);
        }
      }
      const double nrm = norm2(q);
      if (nrm > 1e-8 * std::sqrt(static_cast<double>(n))) {
        for (double& v : q) v /= nrm;
        break;
      }
      // A draw that fell (numerically) into the span of the previous columns;
      // retry with fresh randomness.
    }
  }
  DenseMatrix Q(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) Q.at(i, j) = cols[j][i];
  return Q;
}

TightFrame finish(DenseMatrix D, std::string kind) {
  const double res = verify_tight(D);
  if (!(res <= kTightnessBudget)) {
    throw std::invalid_argument(
        "frame '" + kind + "': tightness residual ||D D^* - I||_F = " +
        std::to_string(res) + " exceeds the budget 1e-10");
  }
  TightFrame F;
  F.D = std::move(D);
  F.kind = std::move(kind);
  F.tightness_residual = res;
  return F;
}

DenseMatrix build_parseval(std::size_t n, std::size_t d, std::uint64_t seed,
                           std::uint64_t* used_seed) {
  // (G G^*)^{-1/2} G for a Gaussian G; a draw whose Gram matrix is close to
  // singular (smallest eigenvalue below 1e-12 of the largest) is discarded
  // and the next seed is tried instead.
  for (std::uint64_t s = seed;; ++s) {
    Rng rng(s);
    DenseMatrix G(n, d);
    for (double& v : G.a) v = rng.gaussian();
    DenseMatrix S(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k) acc += G.at(i, k) * G.at(j, k);
        S.at(i, j) = acc;
        S.at(j, i) = acc;
      }
    EigResult eig = sym_eig(S);
    const double wmax = eig.values.empty() ? 0.0 : eig.values.front();
    if (eig.values.empty() || eig.values.back() < 1e-12 * wmax) continue;
    // D = U diag(1/sqrt(w)) U^T G.
    DenseMatrix UtG(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += eig.vectors.at(k, i) * G.at(k, j);
        UtG.at(i, j) = acc / std::sqrt(eig.values[i]);
      }
    }
    DenseMatrix D(n, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += eig.vectors.at(i, k) * UtG.at(k, j);
        D.at(i, j) = acc;
      }
    if (used_seed != nullptr) *used_seed = s;
    return D;
  }
}

}  // namespace

double verify_tight(const DenseMatrix& D) {
  const std::size_t n = D.rows;
  const std::size_t d = D.cols;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double g = 0.0;
      for (std::size_t k = 0; k < d; ++k) g += D.at(i, k) * D.at(j, k);
      if (i == j) g -= 1.0;
      acc += (i == j) ? g * g : 2.0 * g * g;
    }
  }
  return std::sqrt(acc);
}

std::string frame_kind_name(FrameKind kind) {
  switch (kind) {
    case FrameKind::identity:
      return "identity";
    case FrameKind::random_onb:
      return "random_onb";
    case FrameKind::union_of_onb:
      return "union_of_onb";
    case FrameKind::random_parseval:
      return "random_parseval";
  }
  throw std::logic_error("frame_kind_name: unhandled frame kind");
}

FrameKind frame_kind_from_name(const std::string& name) {
  if (name == "identity") return FrameKind::identity;
  if (name == "random_onb") return FrameKind::random_onb;
  if (name == "union_of_onb") return FrameKind::union_of_onb;
  if (name == "random_parseval") return FrameKind::random_parseval;
  throw std::invalid_argument(
      "unknown frame kind '" + name +
      "' (expected identity, random_onb, union_of_onb, or random_parseval)");
}

TightFrame build_frame(FrameKind kind, std::size_t n, std::size_t d,
                       std::uint64_t seed) {
  if (n == 0 || d < n) {
    throw std::invalid_argument(
        "build_frame: need 1 <= n <= d, got n=" + std::to_string(n) +
        ", d=" + std::to_string(d));
  }
  switch (kind) {
    case FrameKind::identity: {
      if (d != n)
        throw std::invalid_argument(
            "frame 'identity': requires d == n, got n=" + std::to_string(n) +
            ", d=" + std::to_string(d));
      return finish(identity_matrix(n), "identity");
    }
    case FrameKind::random_onb: {
      if (d != n)
        throw std::invalid_argument(
            "frame 'random_onb': requires d == n, got n=" + std::to_string(n) +
            ", d=" + std::to_string(d));
      Rng rng(seed);
      return finish(random_orthogonal(n, rng), "random_onb");
    }
    case FrameKind::union_of_onb: {
      if (d % n != 0 || d / n < 2)
        throw std::invalid_argument(
            "frame 'union_of_onb': requires d = k*n with integer k >= 2, got "
            "n=" + std::to_string(n) + ", d=" + std::to_string(d));
      const std::size_t k = d / n;
      const double scale = 1.0 / std::sqrt(static_cast<double>(k));
      DenseMatrix D(n, d);
      for (std::size_t b = 0; b < k; ++b) {
        Rng rng(hash64({seed, static_cast<std::uint64_t>(b)}));
        DenseMatrix Q = random_orthogonal(n, rng);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) D.at(i, b * n + j) = scale * Q.at(i, j);
      }
      return finish(std::move(D), "union_of_onb");
    }
    case FrameKind::random_parseval:
      return finish(build_parseval(n, d, seed, nullptr), "random_parseval");
  }
  throw std::invalid_argument("build_frame: unknown frame kind");
}

TightFrame frame_from_matrix(DenseMatrix D, std::string kind) {
  if (D.rows == 0 || D.cols < D.rows) {
    throw std::invalid_argument(
        "frame '" + kind + "': need 1 <= n <= d, got n=" +
        std::to_string(D.rows) + ", d=" + std::to_string(D.cols));
  }
  return finish(std::move(D), std::move(kind));
}

TightFrame frame_from_file(const std::string& path) {
  return frame_from_matrix(read_matrix_market(path), "from_file");
}

Vec frame_apply(const TightFrame& F, const Vec& v, FrameDir dir) {
  if (dir == FrameDir::analysis) {
    if (v.size() != F.n())
      throw std::invalid_argument(
          "frame_apply(analysis): expected a vector of length " +
          std::to_string(F.n()) + ", got " + std::to_string(v.size()));
    return matvec_t(F.D, v);
  }
  if (v.size() != F.d())
    throw std::invalid_argument(
        "frame_apply(synthesis): expected a vector of length " +
        std::to_string(F.d()) + ", got " + std::to_string(v.size()));
  return matvec(F.D, v);
}

double norm_11(const TightFrame& F) {
  const std::size_t n = F.n();
  const std::size_t d = F.d();
  double best = 0.0;
  Vec col(n);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = F.D.at(i, j);
    const Vec g = matvec_t(F.D, col);  // column j of D^* D
    best = std::max(best, norm1(g));
  }
  return best;
}

TightFrame block_diag_frame(const TightFrame& D, const TightFrame& Omega) {
  const std::size_t n = D.n(), dd = D.d();
  const std::size_t m = Omega.n(), M = Omega.d();
  DenseMatrix W(n + m, dd + M);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dd; ++j) W.at(i, j) = D.D.at(i, j);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < M; ++j) W.at(n + i, dd + j) = Omega.D.at(i, j);
  return finish(std::move(W), "block_diag(" + D.kind + "," + Omega.kind + ")");
}

}  // namespace fr
