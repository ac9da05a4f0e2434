#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "sglab/errors.hpp"
#include "sglab/random_fields.hpp"
#include "sglab/stats.hpp"

using namespace sglab;

TEST(FitLine, ExactLine) {
  std::vector<double> x{1, 2, 3, 4}, y{1, 3, 5, 7};
  auto f = fit_line(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, -1.0, 1e-14);
  EXPECT_NEAR(f.slope_stderr, 0.0, 1e-14);
  EXPECT_NEAR(f.r2, 1.0, 1e-14);
  EXPECT_EQ(f.points, 4);
}

TEST(FitLine, StandardErrorByHand) {
  // x = 0,1,2, y = 0,2,1
  std::vector<double> x{0, 1, 2}, y{0, 2, 1};
  auto f = fit_line(x, y);
  EXPECT_NEAR(f.slope, 0.5, 1e-15);
  EXPECT_NEAR(f.intercept, 0.5, 1e-15);
  // residuals -0.5, 1, -0.5: SSE 1.5, s^2 = 1.5 / 1, Sxx = 2
  EXPECT_NEAR(f.slope_stderr, std::sqrt(1.5 / 2.0), 1e-15);
  // SST = 2, r2 = 1 - 1.5 / 2
  EXPECT_NEAR(f.r2, 0.25, 1e-15);
}

TEST(FitLine, Errors) {
  std::vector<double> one{1.0}, two{1.0, 1.0}, y2{1.0, 2.0}, y3{1, 2, 3};
  EXPECT_THROW(fit_line(one, one), DegenerateInputError);
  EXPECT_THROW(fit_line(two, y2), DegenerateInputError);
  EXPECT_THROW(fit_line(y2, y3), ShapeError);
}

TEST(FitLogLog, PowerLaw) {
  std::vector<double> x{0.04, 0.02, 0.01}, y;
  for (double e : x) y.push_back(3.0 * e * e);
  auto f = fit_loglog(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-13);
  EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-12);
  std::vector<double> bad{1.0, 0.0, 2.0};
  EXPECT_THROW(fit_loglog(x, bad), DegenerateInputError);
}

TEST(RandomField, MeanZeroNormalizedBandLimited) {
  TorusGrid g(32);
  std::mt19937_64 rng(11);
  auto f = random_field(g, RandomFieldSpec{2.0, 5, 0.7}, rng);
  EXPECT_NEAR(f.mean(), 0.0, 1e-15);
  EXPECT_NEAR(norm(f, NormKind::L2()), 0.7, 1e-13);
  const auto& s = f.spectrum();
  double outside = 0.0, inside = 0.0;
  for (int i = 0; i < 32; ++i) {
    for (int j = 0; j < g.spectral_cols(); ++j) {
      const double a = std::abs(s[static_cast<std::size_t>(i) * g.spectral_cols() + j]);
      (std::max(std::abs(g.freq(i)), j) > 5 ? outside : inside) += a;
    }
  }
  EXPECT_GT(inside, 0.0);
  EXPECT_LT(outside, 1e-12 * inside);
}

TEST(RandomField, DeterministicAndResolutionFree) {
  std::mt19937_64 a(5), b(5), c(5);
  auto f = random_field(TorusGrid(32), {3.0, 4, 1.0}, a);
  auto g = random_field(TorusGrid(32), {3.0, 4, 1.0}, b);
  auto h = random_field(TorusGrid(64), {3.0, 4, 1.0}, c);
  EXPECT_EQ(std::vector<double>(f.values().begin(), f.values().end()),
            std::vector<double>(g.values().begin(), g.values().end()));
  // same coefficients on a finer grid: samples agree at shared points
  double err = 0.0;
  for (int i = 0; i < 32; ++i) {
    for (int j = 0; j < 32; ++j) err = std::max(err, std::abs(f(i, j) - h(2 * i, 2 * j)));
  }
  EXPECT_LT(err, 1e-13);
}

TEST(DeriveSeed, DistinctStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t base = 0; base < 10; ++base) {
    for (std::uint64_t stream = 0; stream < 10; ++stream) {
      for (std::uint64_t idx = 0; idx < 20; ++idx) seen.insert(derive_seed(base, stream, idx));
    }
  }
  EXPECT_EQ(seen.size(), 2000u);
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
}
