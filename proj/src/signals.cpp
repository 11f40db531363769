#include "fr/signals.hpp"

#include <cmath>
#include <stdexcept>

#include "fr/bounds.hpp"
#include "fr/rng.hpp"

namespace fr {
namespace {

double draw_amplitude(AmplitudeLaw law, Rng& rng) {
  switch (law) {
    case AmplitudeLaw::unit:
      return 1.0;
    case AmplitudeLaw::rademacher:
      return (rng.next_u64() & 1u) ? 1.0 : -1.0;
    case AmplitudeLaw::gaussian:
      return rng.gaussian();
  }
  return 1.0;
}

}  // namespace

SignalDraw generate_signal(const SignalSpec& spec, const TightFrame& F,
                           std::uint64_t seed) {
  const std::size_t n = F.n(), d = F.d();
  if (spec.s < 1 || spec.s > d)
    throw std::invalid_argument("generate_signal: need 1 <= s <= d, got s=" +
                                std::to_string(spec.s));
  const bool needs_onb = spec.model == SignalModel::exact_analysis_sparse ||
                         spec.model == SignalModel::power_law;
  if (needs_onb && d != n)
    throw std::invalid_argument(
        "generate_signal: exact coefficient placement needs an orthonormal "
        "frame (d = n), got n=" + std::to_string(n) + ", d=" +
        std::to_string(d) + "; use the synthesis_sparse model for redundant "
        "frames");
  if (spec.model == SignalModel::power_law &&
      !(spec.p > 0.0 && spec.p <= 1.0))
    throw std::invalid_argument(
        "generate_signal: power_law exponent p must lie in (0, 1]");

  Rng rng(seed);
  Vec x(d, 0.0);
  std::vector<std::size_t> idx(d);
  for (std::size_t i = 0; i < d; ++i) idx[i] = i;

  if (spec.model == SignalModel::power_law) {
    // Full random permutation: every position carries mass.
    for (std::size_t i = 0; i + 1 < d; ++i) {
      const std::size_t j = i + rng.uniform_below(d - i);
      std::swap(idx[i], idx[j]);
    }
    for (std::size_t j = 0; j < d; ++j) {
      const double mag =
          spec.R * std::pow(static_cast<double>(j + 1), -1.0 / spec.p);
      x[idx[j]] = (rng.next_u64() & 1u) ? mag : -mag;
    }
  } else {
    for (std::size_t i = 0; i < spec.s; ++i) {
      const std::size_t j = i + rng.uniform_below(d - i);
      std::swap(idx[i], idx[j]);
    }
    for (std::size_t i = 0; i < spec.s; ++i)
      x[idx[i]] = draw_amplitude(spec.amplitude_law, rng);
  }

  SignalDraw out;
  out.f = matvec(F.D, x);  // synthesis; for an ONB this places D^* f = x
  const Vec coeffs = matvec_t(F.D, out.f);
  out.achieved_tails.resize(spec.s);
  for (std::size_t k = 1; k <= spec.s; ++k)
    out.achieved_tails[k - 1] = l1_tail(coeffs, k);
  return out;
}

}  // namespace fr
