#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "doctest.h"
#include "fr/frame.hpp"
#include "fr/market.hpp"
#include "fr/rng.hpp"

using namespace fr;

namespace {

Vec random_signal(std::size_t n, std::uint64_t seed) {
  Vec f(n);
  Rng rng(seed);
  for (double& v : f) v = rng.gaussian();
  return f;
}

}  // namespace

TEST_CASE("every construction meets the tightness budget") {
  const struct {
    FrameKind kind;
    std::size_t n, d;
  } cases[] = {
      {FrameKind::identity, 6, 6},
      {FrameKind::random_onb, 8, 8},
      {FrameKind::union_of_onb, 5, 15},
      {FrameKind::random_parseval, 6, 11},
  };
  for (const auto& c : cases) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const TightFrame F = build_frame(c.kind, c.n, c.d, seed);
      CHECK(F.n() == c.n);
      CHECK(F.d() == c.d);
      CHECK(F.tightness_residual <= 1e-10);
      CHECK(verify_tight(F.D) <= 1e-10);
    }
  }
}

TEST_CASE("Parseval identity and perfect reconstruction") {
  const TightFrame F = build_frame(FrameKind::random_parseval, 7, 13, 3);
  const Vec f = random_signal(7, 42);
  const Vec x = frame_analysis(F, f);
  REQUIRE(x.size() == 13);
  // ||D^* f||_2 = ||f||_2.
  double nf = 0.0, nx = 0.0;
  for (double v : f) nf += v * v;
  for (double v : x) nx += v * v;
  CHECK(std::sqrt(nx) == doctest::Approx(std::sqrt(nf)).epsilon(1e-9));
  // f = D (D^* f).
  const Vec back = frame_synthesis(F, x);
  for (std::size_t i = 0; i < f.size(); ++i)
    CHECK(back[i] == doctest::Approx(f[i]).epsilon(1e-9));
}

TEST_CASE("identity frame is literally the identity") {
  const TightFrame F = build_frame(FrameKind::identity, 4, 4, 0);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(F.D.at(i, j) == (i == j ? 1.0 : 0.0));
  CHECK(norm_11(F) == doctest::Approx(1.0));
}

TEST_CASE("dimension requirements are enforced") {
  CHECK_THROWS_AS((void)build_frame(FrameKind::identity, 4, 5, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)build_frame(FrameKind::random_onb, 4, 8, 0),
                  std::invalid_argument);
  // union_of_onb needs d = k*n with k >= 2.
  CHECK_THROWS_AS((void)build_frame(FrameKind::union_of_onb, 4, 4, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)build_frame(FrameKind::union_of_onb, 4, 10, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)build_frame(FrameKind::random_parseval, 5, 4, 0),
                  std::invalid_argument);
}

TEST_CASE("frame_from_matrix rejects non-tight rows and reports the residual") {
  DenseMatrix bad(2, 3, {1, 0, 0, 0, 1, 0.5});
  try {
    (void)frame_from_matrix(bad, "custom");
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    // The measured residual appears in the message.
    CHECK(std::string(e.what()).find("residual") != std::string::npos);
  }
}

TEST_CASE("frame files round trip through the market format") {
  const std::string path = "frame_roundtrip_test.mtx";
  const TightFrame F = build_frame(FrameKind::union_of_onb, 4, 8, 9);
  write_matrix_market(path, F.D);
  const TightFrame G = frame_from_file(path);
  CHECK(G.n() == 4);
  CHECK(G.d() == 8);
  for (std::size_t i = 0; i < F.D.a.size(); ++i) CHECK(G.D.a[i] == F.D.a[i]);
  std::remove(path.c_str());
}

TEST_CASE("same seed, same frame; different seed, different frame") {
  const TightFrame a = build_frame(FrameKind::random_onb, 6, 6, 5);
  const TightFrame b = build_frame(FrameKind::random_onb, 6, 6, 5);
  const TightFrame c = build_frame(FrameKind::random_onb, 6, 6, 6);
  CHECK(a.D.a == b.D.a);
  CHECK(a.D.a != c.D.a);
}

TEST_CASE("norm_11 is at least 1 and matches a direct computation") {
  const TightFrame F = build_frame(FrameKind::union_of_onb, 5, 10, 2);
  double direct = 0.0;
  for (std::size_t j = 0; j < F.d(); ++j) {
    double colsum = 0.0;
    for (std::size_t i = 0; i < F.d(); ++i) {
      double g = 0.0;
      for (std::size_t r = 0; r < F.n(); ++r)
        g += F.D.at(r, i) * F.D.at(r, j);
      colsum += std::abs(g);
    }
    direct = std::max(direct, colsum);
  }
  CHECK(norm_11(F) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(norm_11(F) >= 1.0 - 1e-12);
}

TEST_CASE("block-diagonal frame is tight and keeps both blocks") {
  const TightFrame D = build_frame(FrameKind::random_onb, 3, 3, 1);
  const TightFrame W = block_diag_frame(D, build_frame(FrameKind::identity, 2, 2, 0));
  CHECK(W.n() == 5);
  CHECK(W.d() == 5);
  CHECK(verify_tight(W.D) <= 1e-10);
  CHECK(W.D.at(0, 0) == doctest::Approx(D.D.at(0, 0)));
  CHECK(W.D.at(3, 3) == doctest::Approx(1.0));
  CHECK(W.D.at(0, 3) == doctest::Approx(0.0));
}

TEST_CASE("frame kind names round trip") {
  for (FrameKind k : {FrameKind::identity, FrameKind::random_onb,
                      FrameKind::union_of_onb, FrameKind::random_parseval})
    CHECK(frame_kind_from_name(frame_kind_name(k)) == k);
  CHECK_THROWS_AS((void)frame_kind_from_name("fourier"), std::invalid_argument);
}

TEST_CASE("frame_apply checks dimensions") {
  const TightFrame F = build_frame(FrameKind::random_onb, 4, 4, 0);
  CHECK_THROWS_AS((void)frame_analysis(F, Vec{1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS((void)frame_synthesis(F, Vec{1, 2, 3}), std::invalid_argument);
}
