#include "fr/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

#include "fr/market.hpp"
#include "fr/rng.hpp"

namespace fr {
namespace {

// Advances T through size-s subsets of {0,...,d-1} in lexicographic order.
bool next_support(std::vector<std::size_t>& T, std::size_t d) {
  const std::size_t s = T.size();
  std::size_t i = s;
  while (i > 0) {
    --i;
    if (T[i] + (s - i) < d) {
      ++T[i];
      for (std::size_t j = i + 1; j < s; ++j) T[j] = T[j - 1] + 1;
      return true;
    }
  }
  return false;
}

// delta for one support from the pencil eigenvalues; directions in the null
// space of D restricted to T produce 0 on both sides of the isometry
// inequality and impose no constraint, so the trimmed pencil is exactly right.
double support_delta(const DenseMatrix& G, const DenseMatrix& H,
                     const std::vector<std::size_t>& T) {
  const std::size_t s = T.size();
  DenseMatrix Sa(s, s), Sb(s, s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) {
      Sa.at(i, j) = G.at(T[i], T[j]);
      Sb.at(i, j) = H.at(T[i], T[j]);
    }
  const Vec lams = generalized_sym_eig(Sa, Sb, 1e-10);
  if (lams.empty()) return 0.0;
  return std::max(lams.front() - 1.0, 1.0 - lams.back());
}

}  // namespace

std::uint64_t binomial_count(std::size_t d, std::size_t s, std::uint64_t cap) {
  if (s > d) return 0;
  s = std::min(s, d - s);
  std::uint64_t c = 1;
  for (std::size_t i = 1; i <= s; ++i) {
    // c <- c * (d - s + i) / i, exact because the running value is always a
    // binomial coefficient; saturate before the multiply can overflow.
    const std::uint64_t num = d - s + i;
    if (c > (cap + 1) / num * i) return cap + 1;
    c = c * num / i;
    if (c > cap) return cap + 1;
  }
  return c;
}

DenseMatrix draw_sensing(const SensingSpec& spec) {
  if (spec.kind == SensingKind::from_file) {
    DenseMatrix A = read_matrix_market(spec.path);
    if ((spec.m != 0 && spec.m != A.rows) ||
        (spec.n != 0 && spec.n != A.cols)) {
      throw std::invalid_argument(
          "draw_sensing: file '" + spec.path + "' is " +
          std::to_string(A.rows) + "x" + std::to_string(A.cols) +
          " but the spec asks for " + std::to_string(spec.m) + "x" +
          std::to_string(spec.n));
    }
    return A;
  }
  if (spec.m == 0 || spec.n == 0)
    throw std::invalid_argument("draw_sensing: m and n must be >= 1");
  DenseMatrix A(spec.m, spec.n);
  Rng rng(spec.seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.m));
  if (spec.kind == SensingKind::gaussian) {
    for (double& v : A.a) v = scale * rng.gaussian();
  } else {
    for (double& v : A.a) v = (rng.next_u64() & 1u) ? scale : -scale;
  }
  return A;
}

std::string drip_report_json(const DRipReport& r) {
  nlohmann::json j;
  j["s"] = r.s;
  j["mode"] = r.mode;
  j["delta"] = r.delta;
  j["supports_examined"] = r.supports_examined;
  j["is_certificate"] = r.is_certificate;
  return j.dump(2);
}

DRipReport drip_exact(const DenseMatrix& A, const TightFrame& F,
                      std::size_t s) {
  const std::size_t d = F.d();
  if (s < 1 || s > d)
    throw std::invalid_argument("drip_exact: need 1 <= s <= d, got s=" +
                                std::to_string(s));
  if (A.cols != F.n())
    throw std::invalid_argument(
        "drip_exact: sensing matrix has " + std::to_string(A.cols) +
        " columns but the frame lives in dimension " + std::to_string(F.n()));
  const std::uint64_t count = binomial_count(d, s, kDripEnumerationBudget);
  if (count > kDripEnumerationBudget) {
    throw std::invalid_argument(
        "drip_exact: C(" + std::to_string(d) + ", " + std::to_string(s) +
        ") exceeds the enumeration budget of " +
        std::to_string(kDripEnumerationBudget) +
        " supports; use drip_monte_carlo for a sampled lower bound");
  }

  const DenseMatrix B = matmul(A, F.D);                  // A D, m x d
  const DenseMatrix G = matmul(transpose(B), B);         // (AD)^* (AD)
  const DenseMatrix H = matmul(transpose(F.D), F.D);     // D^* D

  std::vector<std::size_t> T(s);
  for (std::size_t i = 0; i < s; ++i) T[i] = i;
  double delta = 0.0;
  do {
    delta = std::max(delta, support_delta(G, H, T));
  } while (next_support(T, d));

  DRipReport r;
  r.s = s;
  r.mode = "exact";
  r.delta = std::max(delta, 0.0);
  r.supports_examined = count;
  r.is_certificate = true;
  return r;
}

DRipReport drip_monte_carlo(const DenseMatrix& A, const TightFrame& F,
                            std::size_t s, std::size_t trials,
                            std::uint64_t seed) {
  const std::size_t d = F.d();
  const std::size_t n = F.n();
  if (s < 1 || s > d)
    throw std::invalid_argument("drip_monte_carlo: need 1 <= s <= d, got s=" +
                                std::to_string(s));
  if (trials < 1)
    throw std::invalid_argument("drip_monte_carlo: trials must be >= 1");
  if (A.cols != n)
    throw std::invalid_argument(
        "drip_monte_carlo: sensing matrix has " + std::to_string(A.cols) +
        " columns but the frame lives in dimension " + std::to_string(n));

  std::vector<std::size_t> idx(d);
  double delta = 0.0;
  Vec v(n), coeff(s);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(hash64({seed, static_cast<std::uint64_t>(t)}));
    // Support: first s entries of a partially shuffled index list.
    for (std::size_t i = 0; i < d; ++i) idx[i] = i;
    for (std::size_t i = 0; i < s; ++i) {
      const std::size_t j = i + rng.uniform_below(d - i);
      std::swap(idx[i], idx[j]);
    }
    for (std::size_t i = 0; i < s; ++i) coeff[i] = rng.gaussian();
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t r = 0; r < n; ++r) v[r] += coeff[i] * F.D.at(r, idx[i]);
    const double vv = dot(v, v);
    if (vv <= 1e-300) continue;  // direction annihilated by D; no constraint
    const Vec Av = matvec(A, v);
    delta = std::max(delta, std::abs(dot(Av, Av) / vv - 1.0));
  }

  DRipReport r;
  r.s = s;
  r.mode = "monte_carlo";
  r.delta = delta;
  r.supports_examined = trials;
  r.is_certificate = false;
  return r;
}

double concentration_probe(const ProbeSpec& spec, double delta,
                           std::size_t trials, std::uint64_t seed) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument(
        "concentration_probe: delta must lie in (0, 1)");
  if (trials < 100)
    throw std::invalid_argument(
        "concentration_probe: need at least 100 trials");
  if (!spec.fixed_op && (spec.m == 0 || spec.n == 0))
    throw std::invalid_argument(
        "concentration_probe: random probe needs m >= 1 and n >= 1");

  std::size_t violations = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(hash64({seed, static_cast<std::uint64_t>(t)}));
    double dev = 0.0;
    if (spec.fixed_op) {
      Vec v(spec.fixed_op->in_dim());
      for (double& x : v) x = rng.gaussian();
      const double nrm = norm2(v);
      if (nrm == 0.0) continue;
      for (double& x : v) x /= nrm;
      const Vec w = spec.fixed_op->forward(v);
      dev = std::abs(dot(w, w) - 1.0);
    } else {
      const std::size_t m = spec.m, n = spec.n;
      DenseMatrix A(m, n);
      const double scale = 1.0 / std::sqrt(static_cast<double>(m));
      for (double& x : A.a) x = scale * rng.gaussian();
      Vec v(n + m);
      for (double& x : v) x = rng.gaussian();
      const double nrm = norm2(v);
      if (nrm == 0.0) continue;
      for (double& x : v) x /= nrm;
      // [A, I] v = A v_head + v_tail.
      Vec w(v.begin() + static_cast<std::ptrdiff_t>(n), v.end());
      for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += A.at(i, j) * v[j];
        w[i] += acc;
      }
      dev = std::abs(dot(w, w) - 1.0);
    }
    if (dev >= 2.0 * delta) ++violations;
  }
  return static_cast<double>(violations) / static_cast<double>(trials);
}

std::size_t sample_size_advisor(std::size_t s, std::size_t s_prime,
                                std::size_t d, std::size_t M, double delta,
                                double C) {
  const std::size_t k = s + s_prime;
  const std::size_t D = d + M;
  if (k < 1)
    throw std::invalid_argument("sample_size_advisor: s + s' must be >= 1");
  if (D <= k)
    throw std::invalid_argument(
        "sample_size_advisor: requires d + M > s + s', got d+M=" +
        std::to_string(D) + ", s+s'=" + std::to_string(k));
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument(
        "sample_size_advisor: delta must lie in (0, 1)");
  if (!(C > 0.0))
    throw std::invalid_argument("sample_size_advisor: C must be positive");
  const double v = C / (delta * delta) * static_cast<double>(k) *
                   std::log(static_cast<double>(D) / static_cast<double>(k));
  const double up = std::ceil(v);
  return static_cast<std::size_t>(std::max(1.0, up));
}

}  // namespace fr
