#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "sglab/errors.hpp"
#include "sglab/field_io.hpp"
#include "sglab/torus_spectral.hpp"
#include "support/test_fields.hpp"

using namespace sglab;

using sglab::testing::max_abs_diff;
using sglab::testing::random_trig_field;

TEST(TorusGrid, RejectsBadSizes) {
  EXPECT_THROW(TorusGrid(4), ConfigError);
  EXPECT_THROW(TorusGrid(48), ConfigError);
  EXPECT_NO_THROW(TorusGrid(8));
}

TEST(TorusGrid, WavenumberZeroOnlyAtOrigin) {
  TorusGrid g(16);
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.spectral_cols(); ++j) {
      if (i == 0 && j == 0) {
        EXPECT_EQ(g.k_mag(i, j), 0.0);
      } else {
        EXPECT_GT(g.k_mag(i, j), 0.0);
      }
    }
  }
  auto f = g.freqs();
  EXPECT_EQ(f.front(), 0);
  EXPECT_EQ(f[8], -8);
  EXPECT_EQ(f.back(), -1);
}

TEST(Derivative, SingleModes) {
  TorusGrid g(32);
  auto c = ScalarField::from_function(g, [](double x, double) { return std::cos(kTwoPi * x); });
  auto expect = ScalarField::from_function(
      g, [](double x, double) { return -kTwoPi * std::sin(kTwoPi * x); });
  EXPECT_LT(max_abs_diff(derivative(c, {1, 0}), expect), 1e-12);

  auto k = ScalarField::constant(g, 3.0);
  EXPECT_LT(norm(derivative(k, {0, 1}), NormKind::Linf()), 1e-13);

  auto cc = ScalarField::from_function(
      g, [](double x, double y) { return std::cos(kTwoPi * x) * std::cos(kTwoPi * y); });
  auto ss = ScalarField::from_function(g, [](double x, double y) {
    return 4 * kPi * kPi * std::sin(kTwoPi * x) * std::sin(kTwoPi * y);
  });
  EXPECT_LT(max_abs_diff(derivative(cc, {1, 1}), ss), 1e-11);
}

TEST(Derivative, RejectsHighOrder) {
  auto f = ScalarField::zeros(TorusGrid(8));
  EXPECT_THROW(derivative(f, {2, 1}), UnsupportedOrderError);
  EXPECT_THROW(derivative(f, {3, 0}), UnsupportedOrderError);
  EXPECT_THROW(derivative(f, {-1, 0}), UnsupportedOrderError);
}

TEST(Derivative, MatchesFiniteDifferences) {
  const int n = 64;
  auto f = random_trig_field(n, 3, 7);
  auto fx = derivative(f, {1, 0});
  auto fyy = derivative(f, {0, 2});
  const double h = 1.0 / n;
  double err1 = 0.0, err2 = 0.0, scale1 = 0.0, scale2 = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int ip = (i + 1) % n, im = (i + n - 1) % n, ip2 = (i + 2) % n, im2 = (i + n - 2) % n;
      const int jp = (j + 1) % n, jm = (j + n - 1) % n, jp2 = (j + 2) % n, jm2 = (j + n - 2) % n;
      const double dx = (-f(ip2, j) + 8 * f(ip, j) - 8 * f(im, j) + f(im2, j)) / (12 * h);
      const double dyy =
          (-f(i, jp2) + 16 * f(i, jp) - 30 * f(i, j) + 16 * f(i, jm) - f(i, jm2)) / (12 * h * h);
      err1 = std::max(err1, std::abs(dx - fx(i, j)));
      err2 = std::max(err2, std::abs(dyy - fyy(i, j)));
      scale1 = std::max(scale1, std::abs(fx(i, j)));
      scale2 = std::max(scale2, std::abs(fyy(i, j)));
    }
  }
  EXPECT_LT(err1 / scale1, 1e-3);
  EXPECT_LT(err2 / scale2, 1e-3);
}

TEST(InvLaplacian, SingleAndTwoModes) {
  TorusGrid g(32);
  auto f = ScalarField::from_function(g, [](double x, double) { return std::cos(kTwoPi * x); });
  auto expect = ScalarField::from_function(
      g, [](double x, double) { return -std::cos(kTwoPi * x) / (4 * kPi * kPi); });
  EXPECT_LT(max_abs_diff(inv_laplacian(f), expect), 1e-15);
  EXPECT_NEAR(-1.0 / (4 * kPi * kPi), -0.025330, 1e-6);

  auto two = ScalarField::from_function(
      g, [](double x, double y) { return std::cos(kTwoPi * x) + std::cos(2 * kTwoPi * y); });
  auto two_expect = ScalarField::from_function(g, [](double x, double y) {
    return -std::cos(kTwoPi * x) / (4 * kPi * kPi) - std::cos(2 * kTwoPi * y) / (16 * kPi * kPi);
  });
  EXPECT_LT(max_abs_diff(inv_laplacian(two), two_expect), 1e-15);

  EXPECT_EQ(norm(inv_laplacian(ScalarField::zeros(g)), NormKind::Linf()), 0.0);
}

TEST(InvLaplacian, RejectsNonzeroMean) {
  TorusGrid g(16);
  auto f = ScalarField::from_function(g, [](double x, double) { return 0.1 + std::cos(kTwoPi * x); });
  try {
    inv_laplacian(f);
    FAIL() << "expected MeanViolationError";
  } catch (const MeanViolationError& e) {
    EXPECT_NEAR(e.mean(), 0.1, 1e-14);
    EXPECT_EQ(e.kind(), "mean_violation");
  }
}

TEST(InvLaplacian, RoundTripRandom) {
  for (unsigned s = 0; s < 5; ++s) {
    auto f = random_trig_field(32, 5, s);
    auto back = laplacian(inv_laplacian(f));
    EXPECT_LT(max_abs_diff(back, f) / norm(f, NormKind::Linf()), 1e-12);
  }
}

TEST(PerpGradient, SingleModes) {
  TorusGrid g(32);
  auto psi = ScalarField::from_function(g, [](double, double y) { return std::cos(kTwoPi * y); });
  auto u = perp_gradient(psi);
  auto ux = ScalarField::from_function(
      g, [](double, double y) { return kTwoPi * std::sin(kTwoPi * y); });
  EXPECT_LT(max_abs_diff(u.x, ux), 1e-12);
  EXPECT_LT(norm(u.y, NormKind::Linf()), 1e-12);

  auto psi2 = ScalarField::from_function(g, [](double x, double) { return std::cos(kTwoPi * x); });
  auto u2 = perp_gradient(psi2);
  EXPECT_LT(norm(u2.x, NormKind::Linf()), 1e-12);
  auto uy = ScalarField::from_function(
      g, [](double x, double) { return -kTwoPi * std::sin(kTwoPi * x); });
  EXPECT_LT(max_abs_diff(u2.y, uy), 1e-12);

  auto k = perp_gradient(ScalarField::constant(g, 2.0));
  EXPECT_LT(vector_linf(k), 1e-13);
}

TEST(PerpGradient, DivergenceFree) {
  for (unsigned s = 0; s < 5; ++s) {
    auto psi = random_trig_field(32, 6, 100 + s);
    EXPECT_LE(norm(divergence(perp_gradient(psi)), NormKind::L2()),
              1e-12 * hessian_l2(hessian(psi)));
  }
}

TEST(Norms, SingleModeValues) {
  TorusGrid g(32);
  auto f = ScalarField::from_function(g, [](double x, double) { return std::cos(kTwoPi * x); });
  EXPECT_NEAR(norm(f, NormKind::L2()), std::sqrt(0.5), 1e-14);
  EXPECT_NEAR(norm(f, NormKind::Hminus1()), std::sqrt(0.5) / kTwoPi, 1e-14);
  EXPECT_NEAR(norm(f, NormKind::GradLinf()), kTwoPi, 1e-12);
  EXPECT_NEAR(norm(f, NormKind::Hs(1)), kTwoPi * std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(norm(f, NormKind::W1inf()), 1.0 + kTwoPi, 1e-12);
  EXPECT_NEAR(norm(f, NormKind::Linf()), 1.0, 1e-15);
}

TEST(Norms, HsRequiresMeanZero) {
  auto f = ScalarField::constant(TorusGrid(16), 1.0);
  EXPECT_THROW(norm(f, NormKind::Hs(1)), MeanViolationError);
  EXPECT_THROW(norm(f, NormKind::Hminus1()), MeanViolationError);
  EXPECT_THROW(NormKind::Calpha(1.0), ConfigError);
}

TEST(Norms, ParsevalRandom) {
  for (unsigned s = 0; s < 5; ++s) {
    auto f = random_trig_field(32, 8, 200 + s);
    const double l2 = norm(f, NormKind::L2());
    const double spec = spectral_weighted_sq(f, [](double) { return 1.0; });
    EXPECT_NEAR(spec, l2 * l2, 1e-12 * l2 * l2);
  }
}

TEST(Norms, InterpolationInequalities) {
  for (unsigned s = 0; s < 10; ++s) {
    auto f = random_trig_field(32, 8, 300 + s);
    const double theta = 0.3;
    const double s0 = -1.0, s1 = 2.0;
    const double smid = theta * s0 + (1 - theta) * s1;
    const double lhs = norm(f, NormKind::Hs(smid));
    const double rhs =
        std::pow(norm(f, NormKind::Hs(s0)), theta) * std::pow(norm(f, NormKind::Hs(s1)), 1 - theta);
    EXPECT_LE(lhs, rhs * (1 + 1e-12));
    const double l2 = norm(f, NormKind::L2());
    EXPECT_LE(l2 * l2, norm(f, NormKind::Hminus1()) * norm(f, NormKind::Hs(1)) * (1 + 1e-12));
  }
}

TEST(Norms, HolderSeminorm) {
  TorusGrid g(64);
  EXPECT_EQ(holder_seminorm(ScalarField::constant(g, 1.0), 0.5), 0.0);
  auto f = ScalarField::from_function(g, [](double x, double) { return std::cos(kTwoPi * x); });
  // The continuum seminorm of cos(2 pi x) bounds the discrete one.
  const double c = holder_seminorm(f, 0.5);
  EXPECT_GT(c, 0.0);
  double brute = 0.0;
  for (int d = 1; d <= 32; ++d) {
    for (int i = 0; i < 64; ++i) {
      brute = std::max(brute, std::abs(f(i, 0) - f((i + d) % 64, 0)) / std::sqrt(d / 64.0));
    }
  }
  EXPECT_LE(c, brute + 1e-14);
  EXPECT_NEAR(norm(f, NormKind::Calpha(0.5)), 1.0 + c, 1e-14);
}

TEST(Norms, HessianOperatorNorm) {
  TorusGrid g(8);
  auto a = ScalarField::constant(g, 1.0);
  auto b = ScalarField::constant(g, 2.0);
  auto c = ScalarField::constant(g, -3.0);
  // eigenvalues of [[1,2],[2,-3]] are -1 +- sqrt(8)
  EXPECT_NEAR(hessian_linf({a, b, c}), 1 + std::sqrt(8.0), 1e-14);
  EXPECT_NEAR(hessian_l2({a, b, c}), std::sqrt(1 + 8 + 9.0), 1e-14);
}

TEST(Dealias, CutoffAndIdempotence) {
  TorusGrid g(16);
  auto high = ScalarField::from_function(g, [](double x, double) { return std::cos(7 * kTwoPi * x); });
  EXPECT_LT(norm(dealias(high), NormKind::Linf()), 1e-14);
  auto low = ScalarField::from_function(g, [](double x, double) { return std::cos(kTwoPi * x); });
  EXPECT_LT(max_abs_diff(dealias(low), low), 1e-14);
  auto r = random_trig_field(16, 7, 5);
  auto d1 = dealias(r);
  EXPECT_LT(max_abs_diff(dealias(d1), d1), 1e-13);
}

TEST(ScalarField, SpectrumCacheMatchesValues) {
  auto f = random_trig_field(32, 4, 9);
  EXPECT_FALSE(f.has_cached_spectrum());
  auto fx = derivative(f, {1, 0});
  EXPECT_TRUE(f.has_cached_spectrum());
  EXPECT_TRUE(fx.has_cached_spectrum());
  ScalarField copy(fx.grid(), std::vector<double>(fx.values().begin(), fx.values().end()));
  const auto& a = fx.spectrum();
  const auto& b = copy.spectrum();
  double scale = 0.0, err = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    scale = std::max(scale, std::abs(a[k]));
    err = std::max(err, std::abs(a[k] - b[k]));
  }
  EXPECT_LT(err, 1e-12 * scale);
}

TEST(ScalarField, RejectsWrongSize) {
  EXPECT_THROW(ScalarField(TorusGrid(8), std::vector<double>(10)), ShapeError);
  EXPECT_THROW(ScalarField::zeros(TorusGrid(8)) + ScalarField::zeros(TorusGrid(16)), ShapeError);
}

TEST(FieldIo, RoundTripIsBitExact) {
  auto f = random_trig_field(16, 5, 11);
  std::stringstream ss;
  write_field(ss, f, "rho", 0.3, 0.02);
  FieldHeader h;
  auto g = read_field(ss, &h);
  EXPECT_EQ(h.n, 16);
  EXPECT_EQ(h.kind, "rho");
  EXPECT_EQ(h.time, 0.3);
  ASSERT_TRUE(h.epsilon.has_value());
  EXPECT_EQ(*h.epsilon, 0.02);
  for (std::size_t k = 0; k < f.values().size(); ++k) EXPECT_EQ(f.values()[k], g.values()[k]);

  std::stringstream euler;
  write_field(euler, f, "rho", 0.0, std::nullopt);
  std::string header;
  std::getline(euler, header);
  EXPECT_EQ(header, R"({"n":16,"kind":"rho","time":0.0,"epsilon":null})");
}

TEST(FieldIo, TruncatedPayloadThrows) {
  std::stringstream ss;
  ss << R"({"n":8,"kind":"rho","time":0.0,"epsilon":null})" << '\n' << "abc";
  EXPECT_THROW(read_field(ss), IoError);
}
