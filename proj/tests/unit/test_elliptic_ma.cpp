#include <gtest/gtest.h>

#include <cmath>

#include "sglab/elliptic_ma.hpp"
#include "sglab/errors.hpp"
#include "support/test_fields.hpp"

using namespace sglab;
using sglab::testing::fd_hessian;
using sglab::testing::max_abs_diff;
using sglab::testing::random_trig_field;

namespace {

ScalarField cos_cos(int n) {
  return ScalarField::from_function(
      TorusGrid(n), [](double x, double y) { return std::cos(kTwoPi * x) * std::cos(kTwoPi * y); });
}

ScalarField default_datum(int n) {
  return ScalarField::from_function(TorusGrid(n), [](double x, double y) {
    return std::cos(kTwoPi * x) * std::cos(kTwoPi * y) + 0.5 * std::cos(2 * kTwoPi * y);
  });
}

}  // namespace

TEST(HessianDet, RankOneIsZero) {
  auto psi = ScalarField::from_function(TorusGrid(32), [](double, double y) { return std::cos(kTwoPi * y); });
  EXPECT_LT(norm(hessian_det(psi), NormKind::Linf()), 1e-10);
}

TEST(HessianDet, CosCosClosedFormAgainstFiniteDifferences) {
  const int n = 64;
  auto psi = cos_cos(n);
  auto det = hessian_det(psi);
  const double c = 8 * std::pow(kPi, 4);
  auto closed = ScalarField::from_function(TorusGrid(n), [c](double x, double y) {
    return c * (std::cos(2 * kTwoPi * x) + std::cos(2 * kTwoPi * y));
  });
  EXPECT_LT(max_abs_diff(det, closed), 1e-9 * c);
  // independent oracle: pointwise FD Hessian
  double err = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double xx, xy, yy;
      fd_hessian(psi, i, j, xx, xy, yy);
      err = std::max(err, std::abs(xx * yy - xy * xy - closed(i, j)));
    }
  }
  EXPECT_LT(err / (2 * c), 2e-3);
}

TEST(HessianDet, MeanZeroForRandomFields) {
  for (unsigned s = 0; s < 10; ++s) {
    auto psi = random_trig_field(64, 8, s, 2.0);
    const double h2 = hessian_l2(hessian(psi));
    EXPECT_LE(std::abs(hessian_det(psi).mean()), 1e-10 * h2 * h2);
  }
}

TEST(DetExpansion, DegenerateCases) {
  auto phi = random_trig_field(32, 5, 1);
  auto eta = random_trig_field(32, 5, 2);
  auto zero = ScalarField::zeros(TorusGrid(32));
  EXPECT_LT(det_expansion_residual(phi, zero, 0.4), 1e-12);
  const double scale = hessian_l2(hessian(eta));
  EXPECT_LT(det_expansion_residual(zero, eta, 1.0), 1e-14 * scale * scale);
}

TEST(DetExpansion, ExactForRandomSamples) {
  for (unsigned s = 0; s < 20; ++s) {
    auto phi = random_trig_field(32, 6, 10 + s, 2.0);
    auto eta = random_trig_field(32, 6, 50 + s, 2.0);
    const double a = hessian_l2(hessian(phi));
    const double b = hessian_l2(hessian(eta));
    EXPECT_LE(det_expansion_residual(phi, eta, 0.3), 1e-10 * (a + b) * (a + b));
  }
}

TEST(DetLipschitz, EmpiricalConstantBelowTwo) {
  double worst = 0.0;
  for (unsigned s = 0; s < 20; ++s) {
    auto f = random_trig_field(32, 6, 100 + s, 2.0);
    auto g = random_trig_field(32, 6, 200 + s, 2.0);
    const double lhs = norm(hessian_det(f) - hessian_det(g), NormKind::L2());
    const double rhs = (hessian_linf(hessian(f)) + hessian_linf(hessian(g))) *
                       hessian_l2(hessian(f - g));
    worst = std::max(worst, lhs / rhs);
  }
  EXPECT_LE(worst, 2.0);
}

TEST(SolveSg, EpsZeroIsPoisson) {
  auto rho = default_datum(32);
  auto sol = solve_sg_potential(rho, 0.0);
  EXPECT_EQ(sol.report.iterations, 1);
  EXPECT_TRUE(sol.report.converged);
  EXPECT_EQ(max_abs_diff(sol.psi, inv_laplacian(rho)), 0.0);
}

TEST(SolveSg, OneDimensionalProfileIsExact) {
  TorusGrid g(64);
  auto rho = ScalarField::from_function(
      g, [](double, double y) { return -4 * kPi * kPi * std::cos(kTwoPi * y); });
  auto expect = ScalarField::from_function(g, [](double, double y) { return std::cos(kTwoPi * y); });
  for (double eps : {0.01, 0.05, 0.1}) {
    auto sol = solve_sg_potential(rho, eps);
    EXPECT_LT(max_abs_diff(sol.psi, expect), 1e-12);
  }
}

TEST(SolveSg, ConvergesOnCosCos) {
  auto rho = cos_cos(64);
  auto sol = solve_sg_potential(rho, 0.01, 1e-12);
  EXPECT_TRUE(sol.report.converged);
  EXPECT_LE(sol.report.iterations, 15);
  EXPECT_LE(sol.report.residual, 1e-10);
  // independent check of the residual
  auto res = laplacian(sol.psi) - rho + 0.01 * hessian_det(sol.psi);
  EXPECT_LE(norm(res, NormKind::L2()), 1e-10);
}

TEST(SolveSg, AgreesWithFirstOrderPerturbation) {
  auto rho = default_datum(64);
  auto psi0 = inv_laplacian(rho);
  auto psi1 = -1.0 * inv_laplacian(hessian_det(psi0));
  double prev = 0.0;
  for (double eps : {0.02, 0.01}) {
    auto sol = solve_sg_potential(rho, eps);
    const double err = norm(sol.psi - axpy(psi0, eps, psi1), NormKind::L2());
    if (prev > 0.0) EXPECT_NEAR(prev / err, 4.0, 0.3);
    prev = err;
  }
}

TEST(SolveSg, UpdatesContract) {
  auto rho = default_datum(64);
  const double eps = 0.02;
  auto sol = solve_sg_potential(rho, eps);
  const auto& u = sol.report.updates;
  ASSERT_GE(u.size(), 3u);
  const double bound = 2 * eps * sol.report.hessian_linf * (1 + (0.25 - eps * sol.report.hessian_linf));
  for (std::size_t k = 1; k + 1 < u.size(); ++k) EXPECT_LE(u[k] / u[k - 1], bound);
}

TEST(SolveSg, DivergenceAndNonConvergence) {
  auto rho = default_datum(32);
  try {
    solve_sg_potential(rho, 2.0);
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.eps_hessian(), 0.5);
  }
  EXPECT_THROW(solve_sg_potential(rho, 0.02, 1e-12, 2), NonConvergenceError);
}

TEST(CorrectorPotential, Examples) {
  TorusGrid g(32);
  auto zero = ScalarField::zeros(g);
  auto ycos = ScalarField::from_function(g, [](double, double y) { return std::cos(kTwoPi * y); });
  EXPECT_LT(norm(solve_corrector_potential(zero, ycos), NormKind::Linf()), 1e-10);

  auto xcos = ScalarField::from_function(g, [](double x, double) { return std::cos(kTwoPi * x); });
  auto expect = ScalarField::from_function(
      g, [](double x, double) { return -std::cos(kTwoPi * x) / (4 * kPi * kPi); });
  EXPECT_LT(max_abs_diff(solve_corrector_potential(xcos, zero), expect), 1e-15);

  auto phi1 = solve_corrector_potential(zero, cos_cos(32));
  auto closed = ScalarField::from_function(g, [](double x, double y) {
    return kPi * kPi / 2 * (std::cos(2 * kTwoPi * x) + std::cos(2 * kTwoPi * y));
  });
  EXPECT_LT(max_abs_diff(phi1, closed), 1e-10);
  auto residual = laplacian(phi1) - zero + hessian_det(cos_cos(32));
  EXPECT_LT(norm(residual, NormKind::L2()), 1e-10);
}

TEST(EllipticConsistency, DefectMatchesClosedForm) {
  auto rhobar = default_datum(64);
  auto phibar = inv_laplacian(rhobar);
  auto rho1 = random_trig_field(64, 5, 3, 2.0);
  auto phi1 = solve_corrector_potential(rho1, phibar);
  for (double eps : {0.08, 0.02}) {
    auto d = elliptic_consistency_defect(rhobar, phibar, rho1, phi1, eps);
    auto c = elliptic_consistency_closed_form(phibar, phi1, eps);
    EXPECT_LE(norm(d - c, NormKind::L2()), 1e-10);
  }
}

TEST(Bootstrap, Margins) {
  TorusGrid g(64);
  auto rho = ScalarField::from_function(g, [](double x, double) { return std::cos(kTwoPi * x); });
  auto psi = inv_laplacian(rho);
  auto s0 = bootstrap_status(rho, psi, 0.0, 0.5, 1.0);
  EXPECT_EQ(s0.grad_margin, 0.25);
  EXPECT_EQ(s0.hessian_margin, 0.25);
  EXPECT_TRUE(s0.inside);

  auto s1 = bootstrap_status(rho, psi, 1.0 / (8 * kPi), 0.5, 1.0);
  EXPECT_NEAR(s1.grad_margin, 0.0, 1e-14);
  if (s1.grad_margin <= 0.0) EXPECT_FALSE(s1.inside);
  // ||D^2 psi||_Linf = 1 for this mode, M0 = 1, and log+ vanishes only if Calpha <= 1
  EXPECT_GT(s1.log_estimate_ratio, 0.0);
  EXPECT_LE(s1.log_estimate_ratio, 1.0 + 1e-12);

  auto s2 = bootstrap_status(rho, psi, 0.1, 0.5, 1.0);
  EXPECT_FALSE(s2.inside);
  EXPECT_THROW(bootstrap_status(rho, psi, 0.1, 0.5, 0.0), PreconditionError);
}
