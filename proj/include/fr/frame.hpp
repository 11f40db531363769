#pragma once

#include <cstdint>
#include <string>

#include "fr/linalg.hpp"

// Tight frames: n x d matrices D (d >= n) with D D^* = I, so analysis
// coefficients D^* f reproduce the signal through synthesis, f = D(D^* f),
// and the Parseval identity ||D^* f|| = ||f|| holds.

namespace fr {

struct TightFrame {
  DenseMatrix D;  // n x d, d >= n
  std::string kind;
  double tightness_residual = 0.0;  // ||D D^* - I||_F at construction

  std::size_t n() const { return D.rows; }
  std::size_t d() const { return D.cols; }
};

enum class FrameKind { identity, random_onb, union_of_onb, random_parseval };

std::string frame_kind_name(FrameKind kind);
FrameKind frame_kind_from_name(const std::string& name);

// identity/random_onb need d == n; union_of_onb needs d = k*n with k >= 2.
// Every construction is validated against the 1e-10 tightness budget.
TightFrame build_frame(FrameKind kind, std::size_t n, std::size_t d,
                       std::uint64_t seed);

// Wraps an existing matrix, rejecting it (with the measured residual in the
// message) unless ||D D^* - I||_F <= 1e-10.
TightFrame frame_from_matrix(DenseMatrix D, std::string kind);
TightFrame frame_from_file(const std::string& path);

// Residual ||D D^* - I_n||_F; pure measurement, no thresholding.
double verify_tight(const DenseMatrix& D);

enum class FrameDir { analysis, synthesis };

// analysis: f (length n) -> D^* f (length d); synthesis: x -> D x.
Vec frame_apply(const TightFrame& F, const Vec& v, FrameDir dir);
inline Vec frame_analysis(const TightFrame& F, const Vec& f) {
  return frame_apply(F, f, FrameDir::analysis);
}
inline Vec frame_synthesis(const TightFrame& F, const Vec& x) {
  return frame_apply(F, x, FrameDir::synthesis);
}

// Induced l1->l1 norm of D^* D: the maximum absolute column sum.
double norm_11(const TightFrame& F);

// W = diag(D, Omega), tight for the stacked space.
TightFrame block_diag_frame(const TightFrame& D, const TightFrame& Omega);

}  // namespace fr
