#pragma once

#include <cstdint>
#include <string>

#include "fr/frame.hpp"
#include "fr/linalg.hpp"

// Random measurement ensembles and certification/estimation of the
// restricted-isometry behaviour of A on frame-sparse directions: the smallest
// delta with (1-delta)||Dv||^2 <= ||A D v||^2 <= (1+delta)||Dv||^2 over all
// coefficient vectors v supported on at most s frame columns.

namespace fr {

enum class SensingKind { gaussian, bernoulli, from_file };

struct SensingSpec {
  SensingKind kind = SensingKind::gaussian;
  std::size_t m = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string path;  // from_file only; m/n of 0 adopt the file's shape
};

// gaussian: entries i.i.d. N(0, 1/m); bernoulli: +-1/sqrt(m) equiprobable.
DenseMatrix draw_sensing(const SensingSpec& spec);

struct DRipReport {
  std::size_t s = 0;
  std::string mode;  // "exact" | "monte_carlo"
  double delta = 0.0;
  std::uint64_t supports_examined = 0;
  bool is_certificate = false;
};

std::string drip_report_json(const DRipReport& r);

// Exhaustive certificate: every size-s support is examined through the
// eigenvalues of (D_T^* A^* A D_T, D_T^* D_T) restricted to range(D_T^* D_T).
// Refuses instances with more than kDripEnumerationBudget supports and points
// the caller at drip_monte_carlo instead.
inline constexpr std::uint64_t kDripEnumerationBudget = 1000000;
DRipReport drip_exact(const DenseMatrix& A, const TightFrame& F,
                      std::size_t s);

// Sampled relaxation: max observed deviation over random supports and random
// coefficient directions. Always a lower bound, never a certificate. Trial t
// is seeded by hash64({seed, t}), so runs with more trials extend shorter
// ones rather than reshuffling them.
DRipReport drip_monte_carlo(const DenseMatrix& A, const TightFrame& F,
                            std::size_t s, std::size_t trials,
                            std::uint64_t seed);

// What concentration_probe measures per trial: either a fixed operator, or a
// fresh [A, I] with Gaussian A ~ N(0, 1/m) drawn for that trial.
struct ProbeSpec {
  LinOpPtr fixed_op;         // when set, m/n are ignored
  std::size_t m = 0, n = 0;  // shape of the per-trial Gaussian block
};

// Fraction of trials where |  ||Op v||^2 - ||v||^2  | >= 2*delta*||v||^2 for
// a fresh random unit v (and a fresh operator, when the spec is random).
double concentration_probe(const ProbeSpec& spec, double delta,
                           std::size_t trials, std::uint64_t seed);

// Smallest integer m with m >= C * delta^-2 * (s+s') * ln((d+M)/(s+s')).
std::size_t sample_size_advisor(std::size_t s, std::size_t s_prime,
                                std::size_t d, std::size_t M, double delta,
                                double C);

// C(d, s), saturating at cap+1 so oversized counts stay comparable.
std::uint64_t binomial_count(std::size_t d, std::size_t s, std::uint64_t cap);

}  // namespace fr
