#pragma once

// Independent reference implementations and frozen reference values used by
// the test suite. Everything here is deliberately written from scratch with
// different algorithms than the library (closed-form eigenvalues, Gaussian
// elimination, exhaustive vertex enumeration) so agreement is meaningful.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

// ------------------------------------------------------------------ frozen
// Reference values computed externally with an independent implementation of
// the documented formulas; tests compare against them at 1e-13 relative.

inline constexpr std::uint64_t kMix64Of1 = 0x5692161d100b05e5ULL;
inline constexpr std::uint64_t kMix64OfPattern = 0xb2c058e4ebb5112cULL;  // 0x0123456789abcdef
inline constexpr std::uint64_t kHashEmpty = 0x9e3779b97f4a7c15ULL;
inline constexpr std::uint64_t kHashOf0 = 0x6e789e6aa1b965f4ULL;
inline constexpr std::uint64_t kHashOf1 = 0xe99ff867dbf682c9ULL;
inline constexpr std::uint64_t kHashOf42_7 = 0xcb9450366a633d75ULL;
inline constexpr std::uint64_t kHashOf7_42 = 0x9ec73227f1be9a54ULL;
inline constexpr std::uint64_t kHashOf42_7_3 = 0x0b5e6956d1b9e4b6ULL;
inline constexpr std::uint64_t kHashOf0_0 = 0x46b73e79f0c37c00ULL;
inline constexpr std::uint64_t kHashOfMax = 0xb4d055fcf2cbbd7bULL;

inline constexpr double kUniforms12345[4] = {
    0.13307966866142729, 0.20481663336165912, 0.11954258300911547,
    0.17611780724496118};
inline constexpr double kGaussians12345[4] = {
    0.56254351858757035, 1.9279936267801179, 0.92280219752981008,
    1.842987075391622};

inline constexpr double kAdsLambdaHalf256 = 3.3302184446307908;
inline constexpr double kAlassoMuHalf256 = 6.6604368892615815;
inline constexpr double kSupThreshold100 = 4.2919320525786945;
inline constexpr double kSupFloor100 = 0.99814096646678393;
inline constexpr double kL2Bound1_100 = 11.954886888874647;
inline constexpr double kL2Bound2_7 = 7.5845707403446028;
inline constexpr double kConcentrationCap200 = 0.0057913624086831277;

// ads_bound at delta = 0, lambda = 1, s = 2, tails = {2, 0}.
inline constexpr double kAdsPer1 = 9.6568542494923806;
inline constexpr double kAdsPer2 = 8.0;
// alasso_bound at delta = 0.1, mu = 0.5, norm11 = 3, s = 2, tails = {1, 0.25}.
inline constexpr double kAlassoPer1 = 23.165824894352777;
inline constexpr double kAlassoPer2 = 24.511844635310915;
// separation (sads) at delta = 0.2, lambda = 0.3, s = 2, s' = 3,
// tails = {0.5, 0.1}.
inline constexpr double kSadsPer1 = 6.4901875828257140;
inline constexpr double kSadsPer2 = 6.4736265188367454;
// sabp at epsilon = 0.7, c_noise = 3, c_tail = 2, tails[s-1] = 0.1, s = 2,
// s' = 3.
inline constexpr double kSabpValue = 2.1894427190999910;
// abp_bound(tail = 1.2, s = 4, eps = 0.7, c_tail = 2, c_noise = 3).
inline constexpr double kAbpValue = 3.3;
// power_law_risk(R = 2, p = 1, sigma = 1, d = 3, s = 3, C0 = 1).
inline constexpr double kPowerPer1 = 5.0986122886681098;
inline constexpr double kPowerPer2 = 4.1972245773362196;
inline constexpr double kPowerPer3 = 4.6291701993376620;

inline constexpr double kMinimaxExp = 3.3333333333333335;  // s=4,sigma=1,δ=0.2
inline constexpr double kMinimaxHpValue = 1.6666666666666667;
inline constexpr double kMinimaxHpFloor = 0.22119921692859512;  // 1 - e^{-1/4}

// sample_size_advisor(s=2, s'=1, ln((d+M)/3) with d+M=30).
inline constexpr std::size_t kAdvisorBase = 28;    // C=1, delta=0.5
inline constexpr std::size_t kAdvisorC2 = 56;      // C=2, delta=0.5
inline constexpr std::size_t kAdvisorTight = 111;  // C=1, delta=0.25

// ----------------------------------------------------------------- helpers

using Mat = std::vector<double>;  // row-major, square unless stated

// Gaussian elimination with partial pivoting; returns false when the system
// is numerically singular.
inline bool solve_dense(std::vector<double> a, std::vector<double> b,
                        std::size_t n, std::vector<double>& x) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(a[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(a[r * n + col]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best < 1e-12) return false;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c)
        std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double acc = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) acc -= a[ri * n + c] * x[c];
    x[ri] = acc / a[ri * n + ri];
  }
  return true;
}

// Eigenvalue extremes of a symmetric matrix of size 1..3, closed form.
inline std::pair<double, double> sym_eig_minmax_small(const Mat& m,
                                                      std::size_t n) {
  if (n == 1) return {m[0], m[0]};
  if (n == 2) {
    const double a = m[0], b = m[1], d = m[3];
    const double mid = 0.5 * (a + d);
    const double rad = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
    return {mid - rad, mid + rad};
  }
  if (n != 3) throw std::invalid_argument("sym_eig_minmax_small: n must be <= 3");
  const double a = m[0], b = m[1], c = m[2], d = m[4], e = m[5], f = m[8];
  const double p1 = b * b + c * c + e * e;
  if (p1 == 0.0) {
    const double lo = std::min({a, d, f});
    const double hi = std::max({a, d, f});
    return {lo, hi};
  }
  const double q = (a + d + f) / 3.0;
  const double p2 =
      (a - q) * (a - q) + (d - q) * (d - q) + (f - q) * (f - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  // B = (M - qI) / p
  const double b00 = (a - q) / p, b01 = b / p, b02 = c / p;
  const double b11 = (d - q) / p, b12 = e / p, b22 = (f - q) / p;
  const double detB = b00 * (b11 * b22 - b12 * b12) -
                      b01 * (b01 * b22 - b12 * b02) +
                      b02 * (b01 * b12 - b11 * b02);
  double r = detB / 2.0;
  r = std::clamp(r, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double hi = q + 2.0 * p * std::cos(phi);
  const double lo = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
  return {lo, hi};
}

// Classical restricted-isometry constant of A (m x n, row-major) at order s:
// max over all supports T with |T| = s of the deviation of the eigenvalues
// of A_T^T A_T from 1. Supports s <= 3 (closed-form eigenvalues).
inline double rip_bruteforce(const std::vector<double>& a, std::size_t m,
                             std::size_t n, std::size_t s) {
  if (s < 1 || s > 3 || s > n)
    throw std::invalid_argument("rip_bruteforce: need 1 <= s <= min(n, 3)");
  std::vector<std::size_t> idx(s);
  double worst = 0.0;
  const auto gram = [&](const std::vector<std::size_t>& t) {
    Mat g(s * s, 0.0);
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < s; ++j) {
        double acc = 0.0;
        for (std::size_t r = 0; r < m; ++r)
          acc += a[r * n + t[i]] * a[r * n + t[j]];
        g[i * s + j] = acc;
      }
    return g;
  };
  // Lexicographic enumeration of supports of size exactly s.
  for (std::size_t i = 0; i < s; ++i) idx[i] = i;
  for (;;) {
    const auto [lo, hi] = sym_eig_minmax_small(gram(idx), s);
    worst = std::max({worst, hi - 1.0, 1.0 - lo});
    std::size_t k = s;
    while (k > 0 && idx[k - 1] == n - s + (k - 1)) --k;
    if (k == 0) break;
    ++idx[k - 1];
    for (std::size_t j = k; j < s; ++j) idx[j] = idx[j - 1] + 1;
  }
  return worst;
}

// Exhaustive vertex enumeration for the linear program equivalent to the
// sup-constrained recovery with D = I on n variables:
//
//   minimize sum(t)  over (x, t) in R^{2n}
//   subject to  x <= t, -x <= t, |A^T (A x - y)| <= lambda  (componentwise)
//
// Every vertex is the solution of some 2n active constraints out of 4n;
// enumerate all subsets, keep feasible ones, return the best objective.
// Intended for n = 4 (C(16, 8) = 12870 candidate bases).
inline double ads_lp_vertex_oracle(const std::vector<double>& a, std::size_t m,
                                   std::size_t n, const std::vector<double>& y,
                                   double lambda) {
  const std::size_t nv = 2 * n;       // variables (x, t)
  const std::size_t nc = 4 * n;       // inequality constraints g . u <= h
  std::vector<double> G(nc * nv, 0.0);
  std::vector<double> h(nc, 0.0);
  // x_i - t_i <= 0 and -x_i - t_i <= 0.
  for (std::size_t i = 0; i < n; ++i) {
    G[(2 * i) * nv + i] = 1.0;
    G[(2 * i) * nv + n + i] = -1.0;
    G[(2 * i + 1) * nv + i] = -1.0;
    G[(2 * i + 1) * nv + n + i] = -1.0;
  }
  // B = A^T A, c = A^T y; rows 2n..4n-1: +-(B x - c) <= lambda.
  std::vector<double> B(n * n, 0.0), c(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < m; ++r) acc += a[r * n + i] * a[r * n + j];
      B[i * n + j] = acc;
    }
    double acc = 0.0;
    for (std::size_t r = 0; r < m; ++r) acc += a[r * n + i] * y[r];
    c[i] = acc;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      G[(2 * n + 2 * i) * nv + j] = B[i * n + j];
      G[(2 * n + 2 * i + 1) * nv + j] = -B[i * n + j];
    }
    h[2 * n + 2 * i] = lambda + c[i];
    h[2 * n + 2 * i + 1] = lambda - c[i];
  }

  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick(nv);
  for (std::size_t i = 0; i < nv; ++i) pick[i] = i;
  std::vector<double> sys(nv * nv), rhs(nv), u;
  for (;;) {
    for (std::size_t r = 0; r < nv; ++r) {
      for (std::size_t cidx = 0; cidx < nv; ++cidx)
        sys[r * nv + cidx] = G[pick[r] * nv + cidx];
      rhs[r] = h[pick[r]];
    }
    if (solve_dense(sys, rhs, nv, u)) {
      bool feasible = true;
      for (std::size_t r = 0; r < nc && feasible; ++r) {
        double acc = 0.0;
        for (std::size_t cidx = 0; cidx < nv; ++cidx)
          acc += G[r * nv + cidx] * u[cidx];
        if (acc > h[r] + 1e-9) feasible = false;
      }
      if (feasible) {
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i) obj += u[n + i];
        best = std::min(best, obj);
      }
    }
    // Next lexicographic subset of size nv from {0, ..., nc-1}.
    std::size_t k = nv;
    while (k > 0 && pick[k - 1] == nc - nv + (k - 1)) --k;
    if (k == 0) break;
    ++pick[k - 1];
    for (std::size_t j = k; j < nv; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

// Exact solution of min ||f||_1 subject to ||f - y||_2 <= eps (the residual
// ball program with A = I, D = I): soft thresholding at the level where the
// shrinkage uses up the whole budget.
inline std::vector<double> l1_ball_shrink_oracle(const std::vector<double>& y,
                                                 double eps) {
  double norm = 0.0;
  for (double v : y) norm += v * v;
  norm = std::sqrt(norm);
  if (norm <= eps) return std::vector<double>(y.size(), 0.0);
  const auto spent = [&](double tau) {
    double acc = 0.0;
    for (double v : y) {
      const double c = std::min(std::abs(v), tau);
      acc += c * c;
    }
    return std::sqrt(acc);
  };
  double lo = 0.0, hi = 0.0;
  for (double v : y) hi = std::max(hi, std::abs(v));
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (spent(mid) < eps)
      lo = mid;
    else
      hi = mid;
  }
  const double tau = 0.5 * (lo + hi);
  std::vector<double> f(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double mag = std::abs(y[i]) - tau;
    f[i] = mag > 0.0 ? (y[i] > 0.0 ? mag : -mag) : 0.0;
  }
  return f;
}

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace oracle
