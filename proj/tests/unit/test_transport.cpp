#include <gtest/gtest.h>

#include <cmath>

#include "sglab/errors.hpp"
#include "sglab/transport.hpp"
#include "support/test_fields.hpp"

using namespace sglab;
using sglab::testing::max_abs_diff;

namespace {

ScalarField shear_rho(int n) {
  return ScalarField::from_function(
      TorusGrid(n), [](double, double y) { return -4 * kPi * kPi * std::cos(kTwoPi * y); });
}

RunConfig config(int n, Model model, double eps, double t_final) {
  RunConfig c;
  c.n = n;
  c.model = model;
  c.eps = eps;
  c.t_final = t_final;
  return c;
}

}  // namespace

TEST(Rhs, ShearIsSteadyForAllModels) {
  auto rho = shear_rho(64);
  auto e = make_state(Model::Euler, 0.0, rho);
  EXPECT_LT(norm(rhs(e), NormKind::Linf()), 1e-9);
  EXPECT_LT(max_abs_diff(e.potential, ScalarField::from_function(TorusGrid(64), [](double, double y) {
              return std::cos(kTwoPi * y);
            })),
            1e-13);
  auto s = make_state(Model::SGeps, 0.05, rho);
  EXPECT_LT(norm(rhs(s), NormKind::Linf()), 1e-9);
  auto bg = std::make_shared<const SimState>(e);
  auto c = make_state(Model::Corrector, 0.05, ScalarField::zeros(TorusGrid(64)), 0.0, bg);
  EXPECT_LT(norm(c.potential, NormKind::Linf()), 1e-12);
  EXPECT_LT(norm(rhs(c), NormKind::Linf()), 1e-9);
}

TEST(Rhs, CorrectorWithoutBackgroundIsConfigError) {
  SimState s{0.0, Model::Corrector, 0.1, ScalarField::zeros(TorusGrid(32)),
             ScalarField::zeros(TorusGrid(32)), nullptr};
  EXPECT_THROW(rhs(s), ConfigError);
  EXPECT_THROW(make_state(Model::Corrector, 0.1, ScalarField::zeros(TorusGrid(32))), ConfigError);
}

TEST(Rhs, MatchesPointwiseAdvection) {
  // rho = sin(2 pi x), psi = Lap^{-1} rho = -sin(2 pi x)/(4 pi^2): u = (0, -cos/(2 pi))
  // u . grad rho = 0, so use a two-mode field with a known bracket instead.
  TorusGrid g(32);
  auto rho = ScalarField::from_function(
      g, [](double x, double y) { return std::cos(kTwoPi * x) + std::cos(kTwoPi * y); });
  auto st = make_state(Model::Euler, 0.0, rho);
  // psi = -(cos x + cos y)/(4 pi^2); u = (-psi_y, psi_x) = (-sin y, sin x)/(2 pi)
  // grad rho = -2 pi (sin x, sin y); u . grad rho = sin x sin y - sin x sin y = 0
  EXPECT_LT(norm(rhs(st), NormKind::Linf()), 1e-12);
  auto mixed = ScalarField::from_function(
      g, [](double x, double y) { return std::cos(kTwoPi * x) + std::cos(2 * kTwoPi * y); });
  auto st2 = make_state(Model::Euler, 0.0, mixed);
  // u = (-sin(4 pi y)/(4 pi), sin(2 pi x)/(2 pi)), grad = (-2 pi sin 2pi x, -4 pi sin 4 pi y)
  // -u . grad = -(sin2x sin4y/2 - 2 sin2x sin4y) = 1.5 sin(2 pi x) sin(4 pi y)
  auto expect = ScalarField::from_function(g, [](double x, double y) {
    return 1.5 * std::sin(kTwoPi * x) * std::sin(2 * kTwoPi * y);
  });
  EXPECT_LT(max_abs_diff(rhs(st2), expect), 1e-12);
}

TEST(StepRk4, ZeroStepIsIdentity) {
  auto s = initial_state(config(32, Model::SGeps, 0.02, 1.0));
  auto t = step_rk4(s, 0.0);
  EXPECT_EQ(t.time, s.time);
  EXPECT_EQ(max_abs_diff(t.rho, s.rho), 0.0);
  EXPECT_EQ(max_abs_diff(t.potential, s.potential), 0.0);
}

TEST(StepRk4, CflViolationThrows) {
  auto s = initial_state(config(32, Model::Euler, 0.0, 1.0));
  const double limit = max_stable_dt(s, 0.5);
  EXPECT_THROW(step_rk4(s, 2 * limit, 0.5), StepSizeError);
  EXPECT_NO_THROW(step_rk4(s, limit, 0.5));
}

TEST(StepRk4, ShearDriftOverHundredSteps) {
  for (Model m : {Model::Euler, Model::SGeps}) {
    auto s0 = make_state(m, 0.05, shear_rho(64));
    auto s = s0;
    for (int k = 0; k < 100; ++k) s = step_rk4(s, 1e-3);
    EXPECT_LE(max_abs_diff(s.rho, s0.rho), 1e-10);
    EXPECT_NEAR(s.time, 0.1, 1e-15);
  }
}

TEST(StepRk4, CorrectorCascadeOfZeros) {
  auto e = std::make_shared<const SimState>(make_state(Model::Euler, 0.0, shear_rho(64)));
  auto s = make_state(Model::Corrector, 0.05, ScalarField::zeros(TorusGrid(64)), 0.0, e);
  for (int k = 0; k < 20; ++k) s = step_rk4(s, 1e-3);
  EXPECT_LE(norm(s.rho, NormKind::Linf()), 1e-10);
  EXPECT_LE(max_abs_diff(s.background->rho, e->rho), 1e-10);
}

TEST(StepRk4, FourthOrderInTime) {
  auto s0 = initial_state(config(32, Model::Euler, 0.0, 1.0));
  auto run = [&](double dt) {
    auto s = s0;
    const int steps = static_cast<int>(std::lround(0.8 / dt));
    for (int k = 0; k < steps; ++k) s = step_rk4(s, dt, 10.0);
    return s.rho;
  };
  auto ref = run(0.005);
  const double e1 = norm(run(0.08) - ref, NormKind::L2());
  const double e2 = norm(run(0.04) - ref, NormKind::L2());
  EXPECT_GE(e1 / e2, 8.0 * 0.8);
}

TEST(RunSimulation, ShearTrajectoryIsConstant) {
  auto c = config(32, Model::Euler, 0.0, 0.1);
  c.initial_data.preset = "shear";
  c.sample_interval = 0.02;
  auto tr = run_simulation(c);
  EXPECT_EQ(tr.exit_reason, "completed");
  ASSERT_EQ(tr.states.size(), 6u);
  for (std::size_t k = 1; k < tr.states.size(); ++k) {
    EXPECT_GT(tr.states[k].time, tr.states[k - 1].time);
    EXPECT_LE(max_abs_diff(tr.states[k].rho, tr.states[0].rho), 1e-10);
  }
  EXPECT_DOUBLE_EQ(tr.states.back().time, 0.1);
}

TEST(RunSimulation, ConservesL2) {
  for (Model m : {Model::Euler, Model::SGeps}) {
    auto tr = run_simulation(config(64, m, 0.02, 1.0));
    ASSERT_EQ(tr.exit_reason, "completed");
    ASSERT_EQ(tr.diagnostics.size(), 11u);
    const double l0 = tr.diagnostics.front().l2_rho;
    for (const auto& d : tr.diagnostics) EXPECT_NEAR(d.l2_rho, l0, 1e-8 * l0);
  }
}

TEST(RunSimulation, GradientOdeBound) {
  auto tr = run_simulation(config(64, Model::SGeps, 0.02, 1.0));
  const auto& d = tr.diagnostics;
  double integral = 0.0;
  for (std::size_t k = 1; k < d.size(); ++k) {
    integral += 0.5 * (d[k].t - d[k - 1].t) * (d[k].hess_linf_psi + d[k - 1].hess_linf_psi);
    EXPECT_LE(d[k].grad_linf_rho, d[0].grad_linf_rho * std::exp(integral) * (1 + 1e-3));
  }
}

TEST(RunSimulation, BootstrapExitFromSteepData) {
  auto c = config(64, Model::SGeps, 0.3, 2.0);
  c.initial_data.preset = "steep";
  c.stop_on_exit = true;
  auto tr = run_simulation(c);
  EXPECT_EQ(tr.exit_reason, "bootstrap_exit");
  ASSERT_TRUE(tr.exit_time.has_value());
  EXPECT_LE(*tr.exit_time, 2.0);

  c.eps = 0.2;
  c.t_final = 40.0;
  c.sample_interval = 1.0;
  auto tr2 = run_simulation(c);
  EXPECT_EQ(tr2.exit_reason, "bootstrap_exit");
  ASSERT_TRUE(tr2.exit_time.has_value());
  EXPECT_GT(*tr2.exit_time, 0.0);
  EXPECT_GE(tr2.diagnostics.back().grad_linf_rho * 0.2, 0.25);
  EXPECT_GE(tr2.states.back().time, *tr2.exit_time);
}

TEST(RunSimulation, IsDeterministic) {
  auto c = config(32, Model::SGeps, 0.05, 0.3);
  auto a = run_simulation(c);
  auto b = run_simulation(c);
  ASSERT_EQ(a.states.size(), b.states.size());
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    EXPECT_EQ(max_abs_diff(a.states[k].rho, b.states[k].rho), 0.0);
  }
}

TEST(Corrector, ConsistencyDefectsScaleAsEpsSquared) {
  const int n = 64;
  const double T = 0.5;
  auto cc = config(n, Model::Corrector, 0.0, T);
  auto corr = run_simulation(cc);
  ASSERT_EQ(corr.exit_reason, "completed");
  const SimState& c = corr.states.back();
  const SimState& e = *c.background;
  double prev_ell = 0.0, prev_tr = 0.0;
  for (double eps : {0.08, 0.04, 0.02}) {
    auto rt = axpy(e.rho, eps, c.rho);
    auto pt = axpy(e.potential, eps, c.potential);
    auto ell = elliptic_consistency_defect(e.rho, e.potential, c.rho, c.potential, eps);
    EXPECT_LE(norm(ell - elliptic_consistency_closed_form(e.potential, c.potential, eps),
                   NormKind::L2()),
              1e-10);
    auto dt = axpy(rhs(e), eps, rhs(c));
    auto tres = transport_residual(dt, rt, pt);
    // d_t rho~ + u~ . grad rho~ = eps^2 u1 . grad rho1 identically
    auto u1 = perp_gradient(c.potential);
    auto g1 = gradient(c.rho);
    auto expect = eps * eps * dealias(multiply(u1.x, g1.x) + multiply(u1.y, g1.y));
    EXPECT_LE(norm(tres - expect, NormKind::L2()), 1e-10 * (1 + norm(expect, NormKind::L2())));
    const double le = norm(ell, NormKind::L2());
    const double lt = norm(tres, NormKind::L2());
    if (prev_ell > 0.0) {
      EXPECT_NEAR(std::log2(prev_ell / le), 2.0, 0.1);
      EXPECT_NEAR(std::log2(prev_tr / lt), 2.0, 0.1);
    }
    prev_ell = le;
    prev_tr = lt;
  }
}
