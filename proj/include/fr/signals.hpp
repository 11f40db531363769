#pragma once

#include <cstdint>

#include "fr/frame.hpp"
#include "fr/linalg.hpp"

// Test-signal generators, parameterized by how the analysis coefficients
// D^* f should look: exactly sparse, sparse through synthesis, or decaying
// like a power law.

namespace fr {

enum class SignalModel {
  exact_analysis_sparse,  // ||D^* f||_0 = s; needs an orthonormal frame
  synthesis_sparse,       // f = D x, ||x||_0 = s; any frame
  power_law               // sorted |D^* f|_(j) = R j^{-1/p}; needs an ONB
};

enum class AmplitudeLaw { unit, rademacher, gaussian };

struct SignalSpec {
  SignalModel model = SignalModel::exact_analysis_sparse;
  std::size_t s = 1;  // sparsity (and the length of the reported tail curve)
  double R = 1.0;     // power_law scale
  double p = 0.5;     // power_law exponent, in (0, 1]
  AmplitudeLaw amplitude_law = AmplitudeLaw::rademacher;
};

struct SignalDraw {
  Vec f;  // length n
  // achieved_tails[k-1] = ||D^* f - (D^* f)_[k]||_1 for k = 1..s, measured on
  // the actual generated signal (matters for synthesis_sparse on redundant
  // frames, where D^* f is generally not exactly sparse).
  Vec achieved_tails;
};

SignalDraw generate_signal(const SignalSpec& spec, const TightFrame& F,
                           std::uint64_t seed);

}  // namespace fr
