#include "fr/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fr/rng.hpp"

namespace fr {
namespace {

void check_sigma(double sigma) {
  if (!(sigma >= 0.0))
    throw std::invalid_argument("noise: sigma must be >= 0");
}

void check_d(std::size_t d) {
  if (d < 2)
    throw std::invalid_argument(
        "noise thresholds: require d >= 2 (ln d must be positive), got d=" +
        std::to_string(d));
}

// Sparse component: s_prime frame columns with random signs at the given
// amplitude. Draw order (indices, then signs) is part of the determinism
// contract only in the sense that a fixed build reproduces itself.
void draw_sparse(const NoiseSpec& spec, std::size_t m, Rng& rng,
                 NoiseDraw& out) {
  const TightFrame& omega = *spec.omega;
  const std::size_t M = omega.d();
  if (omega.n() != m)
    throw std::invalid_argument(
        "draw_noise: sparse model frame has " + std::to_string(omega.n()) +
        " rows, expected m=" + std::to_string(m));
  if (spec.s_prime > M)
    throw std::invalid_argument(
        "draw_noise: s_prime=" + std::to_string(spec.s_prime) +
        " exceeds the frame's " + std::to_string(M) + " columns");

  std::vector<std::size_t> idx(M);
  for (std::size_t i = 0; i < M; ++i) idx[i] = i;
  for (std::size_t i = 0; i < spec.s_prime; ++i) {
    const std::size_t j = i + rng.uniform_below(M - i);
    std::swap(idx[i], idx[j]);
  }
  for (std::size_t i = 0; i < spec.s_prime; ++i) {
    const double c = (rng.next_u64() & 1u) ? spec.amplitude : -spec.amplitude;
    for (std::size_t r = 0; r < m; ++r) out.e[r] += c * omega.D.at(r, idx[i]);
  }

  const Vec coeffs = frame_analysis(omega, out.e);
  double top = 0.0;
  for (double c : coeffs) top = std::max(top, std::abs(c));
  std::size_t nnz = 0;
  for (double c : coeffs)
    if (std::abs(c) > 1e-12 * top) ++nnz;
  out.achieved_analysis_sparsity = nnz;
  out.synthesis_fallback = (M > m);
}

}  // namespace

NoiseDraw draw_noise(const NoiseSpec& spec, std::size_t m,
                     std::uint64_t seed) {
  if (m == 0) throw std::invalid_argument("draw_noise: m must be >= 1");
  NoiseDraw out;
  out.z.assign(m, 0.0);
  out.e.assign(m, 0.0);
  Rng rng(seed);

  switch (spec.kind) {
    case NoiseKind::gaussian: {
      check_sigma(spec.sigma);
      for (double& v : out.z) v = spec.sigma * rng.gaussian();
      break;
    }
    case NoiseKind::bounded: {
      if (!(spec.epsilon >= 0.0))
        throw std::invalid_argument("draw_noise: epsilon must be >= 0");
      // Uniform in the l2 ball: Gaussian direction, radius epsilon * U^{1/m}.
      for (double& v : out.z) v = rng.gaussian();
      const double nrm = norm2(out.z);
      const double radius =
          spec.epsilon *
          std::pow(rng.uniform(), 1.0 / static_cast<double>(m));
      const double scale = (nrm > 0.0) ? radius / nrm : 0.0;
      for (double& v : out.z) v *= scale;
      break;
    }
    case NoiseKind::sparse: {
      if (!spec.omega)
        throw std::invalid_argument(
            "draw_noise: sparse model requires a frame for e");
      draw_sparse(spec, m, rng, out);
      break;
    }
    case NoiseKind::composite: {
      check_sigma(spec.sigma);
      if (!spec.omega)
        throw std::invalid_argument(
            "draw_noise: composite model requires a frame for e");
      for (double& v : out.z) v = spec.sigma * rng.gaussian();
      draw_sparse(spec, m, rng, out);
      break;
    }
  }
  return out;
}

double ads_lambda(double sigma, std::size_t d) {
  check_sigma(sigma);
  check_d(d);
  return 2.0 * sigma * std::sqrt(2.0 * std::log(static_cast<double>(d)));
}

double alasso_mu(double sigma, std::size_t d) {
  check_sigma(sigma);
  check_d(d);
  return 4.0 * sigma * std::sqrt(2.0 * std::log(static_cast<double>(d)));
}

TailBound analysis_sup_threshold(double sigma, std::size_t d, double alpha,
                                 double delta1) {
  check_sigma(sigma);
  check_d(d);
  if (!(alpha > 0.0))
    throw std::invalid_argument(
        "analysis_sup_threshold: alpha must be > 0 (the tail exponent "
        "degenerates at 0)");
  if (!(delta1 >= 0.0 && delta1 < 1.0))
    throw std::invalid_argument(
        "analysis_sup_threshold: delta1 must lie in [0, 1)");
  const double lnd = std::log(static_cast<double>(d));
  TailBound r;
  r.value = sigma * std::sqrt(2.0 * (1.0 + alpha) * (1.0 + delta1) * lnd);
  r.probability_floor =
      1.0 - 1.0 / (std::pow(static_cast<double>(d), alpha) *
                   std::sqrt((1.0 + alpha) * std::numbers::pi * lnd));
  return r;
}

TailBound l2_noise_bound(double sigma, std::size_t m) {
  check_sigma(sigma);
  if (m < 1) throw std::invalid_argument("l2_noise_bound: m must be >= 1");
  const double md = static_cast<double>(m);
  TailBound r;
  r.value = sigma * std::sqrt(md + 2.0 * std::sqrt(md * std::log(md)));
  r.probability_floor = 1.0 - 1.0 / md;
  return r;
}

ThresholdReport threshold_report(double sigma, std::size_t d, std::size_t m) {
  ThresholdReport rep;
  // lambda is the alpha = 1, (1 + delta1) <= 2 relaxation of the sharp
  // threshold, so it inherits the alpha = 1 probability floor.
  const double lnd = std::log(static_cast<double>(d));
  const double floor1 =
      1.0 - 1.0 / (static_cast<double>(d) *
                   std::sqrt(2.0 * std::numbers::pi * lnd));
  rep.lambda_ads = {ads_lambda(sigma, d), floor1};
  rep.mu_alasso = {alasso_mu(sigma, d), floor1};
  const TailBound l2 = l2_noise_bound(sigma, m);
  rep.epsilon_l2 = l2;
  return rep;
}

}  // namespace fr
