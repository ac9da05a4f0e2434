#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "sglab/errors.hpp"
#include "sglab/lagrangian.hpp"
#include "support/test_fields.hpp"

using namespace sglab;
using sglab::testing::max_abs_diff;

namespace {

FrozenVelocity uniform(int n, double ux, double uy, double t1 = 10.0) {
  TorusGrid g(n);
  return FrozenVelocity({ScalarField::constant(g, ux), ScalarField::constant(g, uy)}, 0.0, t1);
}

FrozenVelocity shear(int n) {
  TorusGrid g(n);
  return FrozenVelocity({ScalarField::from_function(
                             g, [](double, double y) { return kTwoPi * std::sin(kTwoPi * y); }),
                         ScalarField::zeros(g)},
                        0.0, 10.0);
}

RunConfig euler_config(int n, double t_final) {
  RunConfig c;
  c.n = n;
  c.t_final = t_final;
  return c;
}

}  // namespace

TEST(Interpolate, ExactOnGridAndFourthOrder) {
  auto make = [](int n) {
    return ScalarField::from_function(TorusGrid(n), [](double x, double y) {
      return std::sin(kTwoPi * x) * std::cos(2 * kTwoPi * y);
    });
  };
  auto f = make(32);
  EXPECT_DOUBLE_EQ(interpolate(f, 3.0 / 32, 5.0 / 32), f(3, 5));
  EXPECT_NEAR(interpolate(f, 1.0 + 3.0 / 32, -1.0 + 5.0 / 32), f(3, 5), 1e-14);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  auto err = [&](int n) {
    auto g = make(n);
    double e = 0.0;
    std::mt19937_64 r(4);
    for (int k = 0; k < 200; ++k) {
      const double x = u(r), y = u(r);
      e = std::max(e, std::abs(interpolate(g, x, y) -
                               std::sin(kTwoPi * x) * std::cos(2 * kTwoPi * y)));
    }
    return e;
  };
  EXPECT_GT(err(32) / err(64), 12.0);
}

TEST(AdvectFlow, UniformTranslation) {
  auto u = uniform(32, 1.0, 0.0);
  auto f = advect_flow(u, FlowMap::identity(16), 0.0, 0.25, 0.01);
  auto id = FlowMap::identity(16);
  for (std::size_t p = 0; p < f.x.size(); ++p) {
    EXPECT_NEAR(f.x[p], id.x[p] + 0.25, 1e-14);
    EXPECT_NEAR(f.y[p], id.y[p], 1e-15);
  }
  EXPECT_EQ(f.time, 0.25);
}

TEST(AdvectFlow, ZeroVelocityIsIdentity) {
  auto u = uniform(32, 0.0, 0.0);
  auto f = advect_flow(u, FlowMap::identity(16), 0.0, 1.0, 0.1);
  EXPECT_EQ(flow_gap(f, FlowMap::identity(16, 1.0)), 0.0);
}

TEST(AdvectFlow, ShearCharacteristic) {
  FlowMap one;
  one.m = 1;
  one.x = {0.3};
  one.y = {0.25};
  auto f = advect_flow(shear(64), one, 0.0, 0.7, 0.01);
  EXPECT_NEAR(f.x[0], 0.3 + kTwoPi * 0.7, 1e-12);
  EXPECT_NEAR(f.y[0], 0.25, 1e-14);
}

TEST(AdvectFlow, CoverageError) {
  auto u = uniform(32, 1.0, 0.0, 0.5);
  EXPECT_THROW(advect_flow(u, FlowMap::identity(16), 0.0, 1.0, 0.1), CoverageError);
  EXPECT_THROW(u.at(0.6), CoverageError);
}

TEST(AdvectFlow, ThreadCountDoesNotChangeResult) {
  auto u = shear(32);
  auto a = advect_flow(u, FlowMap::identity(16), 0.0, 0.5, 0.05, 1);
  auto b = advect_flow(u, FlowMap::identity(16), 0.0, 0.5, 0.05, 3);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
}

TEST(FlowGap, Examples) {
  auto id = FlowMap::identity(16);
  EXPECT_EQ(flow_gap(id, id), 0.0);
  auto moved = advect_flow(uniform(32, 1.0, 0.0), id, 0.0, 0.25, 0.25);
  auto still = advect_flow(uniform(32, 0.0, 0.0), id, 0.0, 0.25, 0.25);
  EXPECT_NEAR(flow_gap(moved, still), 0.25, 1e-14);
  EXPECT_THROW(flow_gap(id, FlowMap::identity(32)), ShapeError);
  EXPECT_THROW(flow_gap(id, moved), ShapeError);
}

TEST(MeasurePreservation, IdentityAndTranslation) {
  EXPECT_LT(measure_preservation_defect(FlowMap::identity(32)), 1e-12);
  auto moved = advect_flow(uniform(32, 0.37, -0.81), FlowMap::identity(32), 0.0, 1.0, 0.5);
  EXPECT_LT(measure_preservation_defect(moved), 1e-10);
  EXPECT_THROW(measure_preservation_defect(FlowMap::identity(8)), PreconditionError);
}

TEST(MeasurePreservation, EulerFlow) {
  auto tr = run_simulation(euler_config(128, 1.0));
  TrajectoryVelocity u(tr);
  auto f = advect_flow(u, FlowMap::identity(64), 0.0, 1.0, 0.02);
  EXPECT_LE(measure_preservation_defect(f), 0.05);
}

TEST(TrajectoryVelocity, InterpolatesInTime) {
  auto tr = run_simulation(euler_config(32, 0.5));
  TrajectoryVelocity u(tr);
  EXPECT_EQ(u.t_begin(), 0.0);
  EXPECT_DOUBLE_EQ(u.t_end(), 0.5);
  EXPECT_THROW(u.at(0.6), CoverageError);
  // at a recorded step the stored potential is returned
  const auto& s = tr.steps[3];
  EXPECT_EQ(max_abs_diff(u.potential_at(s.time), s.potential), 0.0);
  // between steps: compare against a direct RK4 step to the midpoint
  const auto& a = tr.steps[2];
  const double mid = 0.5 * (a.time + tr.steps[3].time);
  auto direct = step_rk4(a, mid - a.time);
  EXPECT_LT(max_abs_diff(u.potential_at(mid), direct.potential),
            1e-6 * norm(direct.potential, NormKind::Linf()));
}

TEST(Pushforward, Examples) {
  TorusGrid g(32);
  auto rho0 = ScalarField::from_function(g, [](double x, double y) {
    return std::cos(kTwoPi * x) * std::sin(kTwoPi * y);
  });
  auto same = pushforward_density(rho0, shear(32), 0.0, 0.1);
  EXPECT_EQ(max_abs_diff(same, rho0), 0.0);
  auto yonly = ScalarField::from_function(g, [](double, double y) { return std::cos(kTwoPi * y); });
  EXPECT_LT(max_abs_diff(pushforward_density(yonly, shear(32), 0.5, 0.05), yonly), 1e-12);
}

TEST(Pushforward, MatchesSpectralEuler) {
  auto tr = run_simulation(euler_config(128, 0.5));
  ASSERT_EQ(tr.exit_reason, "completed");
  TrajectoryVelocity u(tr);
  const ScalarField& rho0 = tr.states.front().rho;
  auto pf = pushforward_density(rho0, u, 0.5, 0.02);
  EXPECT_LE(norm(pf - tr.states.back().rho, NormKind::L2()), 5e-3 * norm(rho0, NormKind::L2()));
}

TEST(InverseFlow, ComposesToIdentity) {
  auto tr = run_simulation(euler_config(64, 0.5));
  TrajectoryVelocity u(tr);
  const int m = 32;
  auto inv = inverse_flow(u, m, 0.5, 0.02);
  auto back = advect_flow(u, inv, 0.0, 0.5, 0.02);
  EXPECT_LT(flow_gap(back, FlowMap::identity(m, 0.5)), 1e-8);
  EXPECT_NEAR(lipschitz_estimate(FlowMap::identity(m)), 1.0, 1e-12);
  EXPECT_GE(lipschitz_estimate(inv), 1.0);
}

TEST(FlowMapIo, RoundTrip) {
  auto f = advect_flow(shear(32), FlowMap::identity(16), 0.0, 0.3, 0.1);
  std::stringstream ss;
  write_flow_map(ss, f);
  auto g = read_flow_map(ss);
  EXPECT_EQ(g.m, 16);
  EXPECT_EQ(g.time, f.time);
  EXPECT_EQ(g.x, f.x);
  EXPECT_EQ(g.y, f.y);
}
