#pragma once

#include <cstdint>
#include <optional>

#include "fr/frame.hpp"
#include "fr/linalg.hpp"

// Noise generators for y = Af + z + e and the closed-form regularization
// thresholds that make the dense component z invisible to the recovery
// programs with quantified probability.

namespace fr {

enum class NoiseKind { gaussian, bounded, sparse, composite };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::gaussian;
  double sigma = 0.0;    // gaussian, composite: z ~ N(0, sigma^2 I)
  double epsilon = 0.0;  // bounded: z uniform in the l2 ball of this radius
  std::optional<TightFrame> omega;  // sparse, composite: m x M frame for e
  std::size_t s_prime = 0;          // sparse, composite: target ||Omega^* e||_0
  double amplitude = 1.0;           // sparse, composite: coefficient magnitude
};

struct NoiseDraw {
  Vec z;  // dense component, length m (zeros when the model has none)
  Vec e;  // frame-sparse component, length m (zeros when the model has none)
  // ||Omega^* e||_0 actually produced (entries above 1e-12 of the largest).
  // Square orthonormal Omega hits s_prime exactly; a redundant Omega cannot
  // guarantee analysis sparsity, so e = Omega x is built synthesis-side and
  // this field reports what came out, with synthesis_fallback set.
  std::size_t achieved_analysis_sparsity = 0;
  bool synthesis_fallback = false;
};

NoiseDraw draw_noise(const NoiseSpec& spec, std::size_t m, std::uint64_t seed);

// Scalar value plus the probability with which the bound holds.
struct TailBound {
  double value = 0.0;
  double probability_floor = 0.0;
};

// 2*sigma*sqrt(2 ln d): the sup-norm radius for the analysis residual
// constraint under Gaussian noise. Natural logarithm; d >= 2.
double ads_lambda(double sigma, std::size_t d);

// 4*sigma*sqrt(2 ln d) = 2 * ads_lambda: the penalized variant's weight.
double alasso_mu(double sigma, std::size_t d);

// sigma*sqrt(2(1+alpha)(1+delta1) ln d), holding with probability at least
// 1 - 1/(d^alpha sqrt((1+alpha) pi ln d)); the sharp form behind ads_lambda
// (which is the alpha = 1, delta1 <= 1 relaxation). alpha > 0, delta1 in
// [0,1), d >= 2.
TailBound analysis_sup_threshold(double sigma, std::size_t d, double alpha,
                                 double delta1);

// sigma*sqrt(m + 2 sqrt(m ln m)), holding with probability at least 1 - 1/m:
// the l2 radius that turns Gaussian noise into bounded noise.
TailBound l2_noise_bound(double sigma, std::size_t m);

// All three thresholds for one (sigma, d, m) setting; mu is exactly twice
// lambda and shares its probability floor.
struct ThresholdReport {
  TailBound lambda_ads;
  TailBound mu_alasso;
  TailBound epsilon_l2;
};

ThresholdReport threshold_report(double sigma, std::size_t d, std::size_t m);

}  // namespace fr
