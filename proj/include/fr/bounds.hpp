#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "fr/linalg.hpp"

// Closed-form calculators for the recovery error bounds, the minimax lower
// bounds, and the power-law risk curve. Calculators are pure: they evaluate
// the stated expressions, validate their hypotheses, and never clamp results
// against trivial bounds.

namespace fr {

struct BoundInputs {
  double delta = 0.0;  // restricted-isometry constant at the relevant order
  std::size_t s = 0;   // sparsity level; per-k curves run k = 1..s
  std::size_t s_prime = 0;  // sparse-noise budget (0 = none)
  double param = 0.0;       // lambda, mu, or epsilon depending on the program
  double norm11 = 1.0;      // ||D^* D||_{1,1}
  Vec tails;  // tails[k-1] = l1 mass outside the k largest analysis coeffs
};

struct BoundReport {
  Vec per_k;                // value at k = 1..s
  std::size_t k_star = 1;   // 1-based argmin (smallest k on ties)
  double bound = 0.0;       // per_k[k_star - 1]
  std::map<std::string, double> constants_used;
};

std::string bound_report_json(const BoundReport& r);

// ||x - x_[k]||_1: the l1 mass outside the k largest magnitudes.
double l1_tail(const Vec& x, std::size_t k);

// Sup-constrained program: per_k = 4 sqrt(2k) lambda / (1 - 2 delta)
//                                 + 2 tails[k] / ((1 - 2 delta) sqrt(k)).
// Requires delta < 1/2.
BoundReport ads_bound(const BoundInputs& in);

// Penalized program: per_k = 2 sqrt(2) (1 + 2 norm11) sqrt(k) mu / (1 - 4 delta)
//                           + 4 tails[k] / ((1 - 4 delta) sqrt(k)).
// Requires delta < 1/4.
BoundReport alasso_bound(const BoundInputs& in);

// Residual-ball program: c_tail * tail_s / sqrt(s) + c_noise * epsilon.
// The constants have no closed form, so the caller supplies them.
double abp_bound(double tail_s, std::size_t s, double epsilon, double c_tail,
                 double c_noise);

// Signal/noise-separation variants: same formulas with sqrt(k) replaced by
// sqrt(k + s'). The sabp variant evaluates only k = s and needs the caller
// constants (c_noise multiplies epsilon, c_tail the tail term).
enum class SeparationVariant { sads, salasso, sabp };
BoundReport separation_bound(SeparationVariant variant, const BoundInputs& in,
                             double c_tail = 1.0, double c_noise = 1.0);

// Expected-risk floor s sigma^2 / (1 + delta_s); the high-probability mode
// halves it and holds with probability at least 1 - e^{-s/16}.
enum class MinimaxMode { expectation, high_probability };
struct MinimaxLower {
  double value = 0.0;
  std::optional<double> probability_floor;
};
MinimaxLower minimax_lower(std::size_t s, double sigma, double delta_s,
                           MinimaxMode mode);

// sigma^2 * trace((Phi^* Phi)^{-1}), the exact linear-model minimax risk;
// a (numerically) singular Gram matrix makes it unbounded.
struct TraceRisk {
  double value = 0.0;
  bool unbounded = false;
};
TraceRisk minimax_trace(const DenseMatrix& Phi, double sigma);

// Risk curve for power-law decaying coefficients:
// per_k = C0 (sigma^2 k ln d + R^2 k^{1 - 2/p}), minimized over k = 1..s.
// Requires p in (0, 1] and d >= 2.
BoundReport power_law_risk(double R, double p, double sigma, std::size_t d,
                           std::size_t s, double C0);

}  // namespace fr
