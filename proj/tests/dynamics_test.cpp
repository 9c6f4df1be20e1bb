#include "test_support.hpp"

#include "csur/dynamics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace csur;

namespace {

constexpr double kPi = std::numbers::pi;

AgentState slow(const Vec2& zeta, double theta) { return {zeta, theta, 0.16, 0.8}; }

}  // namespace

TEST(VirtualCenter, Examples) {
  const Vec2 a = virtual_center(slow({0, 0}, 0.0));
  EXPECT_NEAR(a.x(), 0.0, 1e-15);
  EXPECT_NEAR(a.y(), 0.2, 1e-15);
  const Vec2 b = virtual_center(slow({1, 1}, kPi / 2));
  EXPECT_NEAR(b.x(), 0.8, 1e-15);
  EXPECT_NEAR(b.y(), 1.0, 1e-15);
}

TEST(VirtualCenter, OrbitRadiusIsVOverOmega) {
  for (double th : {0.0, 0.3, 2.0, -4.0, 17.0}) {
    const AgentState s = slow({0.5, -1.0}, th);
    EXPECT_NEAR((virtual_center(s) - s.zeta).norm(), 0.2, 1e-15);
  }
}

TEST(VirtualCenter, NegativeOmegaTurnsTheOtherWay) {
  const Vec2 z = virtual_center({{0, 0}, 0.0, 0.16, -0.8});
  EXPECT_NEAR(z.y(), -0.2, 1e-15);
}

TEST(VirtualCenter, ZeroOmegaIsRejected) {
  try {
    virtual_center({{0, 0}, 0.0, 0.16, 0.0});
    FAIL();
  } catch (const CoverageError& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidParameter);
  }
}

TEST(VirtualCenter, OrbitPointInverts) {
  const AgentState s = slow({1.3, 0.4}, 2.2);
  const Vec2 back = orbit_point(virtual_center(s), s.theta, s.v, s.omega);
  EXPECT_NEAR((back - s.zeta).norm(), 0.0, 1e-15);
}

TEST(Sigmoid, Examples) {
  EXPECT_EQ(sigmoid(0.0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(sigmoid(2.0, 2.0), 0.5);
  EXPECT_DOUBLE_EQ(sigmoid(-3.0, 1.0), -0.75);
}

TEST(Sigmoid, OddBoundedIncreasing) {
  double prev = -1.0;
  for (double x = -50.0; x <= 50.0; x += 0.25) {
    const double r = sigmoid(x, 1.5);
    EXPECT_LT(std::abs(r), 1.0);
    EXPECT_DOUBLE_EQ(sigmoid(-x, 1.5), -r);
    EXPECT_GT(r, prev);
    prev = r;
  }
  EXPECT_LT(sigmoid(1e15, 2.0), 1.0);
}

TEST(Sigmoid, NonPositiveDeltaIsRejected) {
  EXPECT_THROW(sigmoid(1.0, 0.0), CoverageError);
  EXPECT_THROW(sigmoid(1.0, -1.0), CoverageError);
}

TEST(ControlInput, ZeroGradientGivesNominalRate) {
  const ControlOutput c = control_input(1.234, Vec2::Zero(), AgentParams{}, 0.8);
  EXPECT_EQ(c.u, 0.8);
  EXPECT_EQ(c.sigma, 0.0);
}

TEST(ControlInput, ArithmeticExample) {
  // sigma = r(0)^T (2, 5) = 2.
  const ControlOutput c = control_input(0.0, {2.0, 5.0}, AgentParams{}, 0.8);
  EXPECT_DOUBLE_EQ(c.sigma, 2.0);
  EXPECT_DOUBLE_EQ(c.u, 1.2);
}

TEST(ControlInput, StaysInsideTheBand) {
  AgentParams p;
  p.gamma = 3.0;
  p.delta = 0.1;
  for (double g : {1e-3, 1.0, 1e3, 1e9}) {
    for (double th : {0.0, kPi}) {
      const double u = control_input(th, {g, 0.0}, p, 0.8).u;
      EXPECT_LT(std::abs(u - 0.8), p.gamma * 0.8);
    }
  }
}

TEST(StepCsur, EulerArithmetic) {
  const AgentState s = step_csur(slow({0, 0}, 0.0), 0.0, 0.05, Integrator::Euler);
  EXPECT_DOUBLE_EQ(s.zeta.x(), 0.008);
  EXPECT_EQ(s.zeta.y(), 0.0);
  EXPECT_EQ(s.theta, 0.0);
}

TEST(StepCsur, ExactAgreesWithEulerForStraightMotion) {
  const AgentState e = step_csur(slow({0, 0}, 0.7), 0.0, 0.05, Integrator::Euler);
  const AgentState x = step_csur(slow({0, 0}, 0.7), 0.0, 0.05, Integrator::Exact);
  EXPECT_NEAR((e.zeta - x.zeta).norm(), 0.0, 1e-17);
}

TEST(StepCsur, ThetaAccumulatesWithoutWrapping) {
  for (Integrator integ : {Integrator::Exact, Integrator::Euler}) {
    AgentState s = slow({0, 0}, 0.0);
    for (int i = 0; i < 100; ++i) s = step_csur(s, 0.8, 0.05, integ);
    EXPECT_NEAR(s.theta, 4.0, 1e-12);
  }
}

TEST(StepCsur, NominalRateClosesTheOrbit) {
  AgentState s = slow({0.3, 0.9}, 0.4);
  const Vec2 z0 = virtual_center(s);
  // 2 pi / (0.8 * 0.05) is not an integer; use a step that divides one period.
  const int n = 160;
  const double dt = 2.0 * kPi / 0.8 / n;
  double drift = 0.0;
  for (int i = 0; i < n; ++i) {
    s = step_csur(s, 0.8, dt);
    drift = std::max(drift, (virtual_center(s) - z0).norm());
  }
  EXPECT_LT(drift, 1e-12);
  EXPECT_NEAR((s.zeta - AgentState{{0.3, 0.9}, 0.4, 0.16, 0.8}.zeta).norm(), 0.0, 1e-12);
}

TEST(StepCsur, VirtualCenterIsStationaryAtNominalRate) {
  AgentState s = slow({2.0, 1.2}, 1.0);
  const Vec2 z0 = virtual_center(s);
  for (int i = 0; i < 200; ++i) s = step_csur(s, s.omega, 0.05);
  EXPECT_LT((virtual_center(s) - z0).norm(), 1e-6);
}

TEST(StepCsur, NonPositiveDtIsRejected) {
  EXPECT_THROW(step_csur(slow({0, 0}, 0.0), 0.8, 0.0), CoverageError);
}

TEST(StepConventional, Examples) {
  const Vec2 z{1.0, 1.0};
  EXPECT_EQ(step_conventional(z, Vec2::Zero(), 0.1, 0.05), z);
  const Vec2 n = step_conventional(z, {0.0, -2.24}, 0.1, 0.05);
  EXPECT_DOUBLE_EQ(n.x(), 1.0);
  EXPECT_NEAR(n.y(), 1.0112, 1e-15);
}

TEST(StepConventional, SingleAgentReachesTheCentroid) {
  const ConvexRegion region = csur::testing::rectangle(4.0, 2.8);
  const DensityField phi = DensityField::uniform();
  Configuration cfg{{1.0, 1.0}};
  for (int i = 0; i < 4000; ++i) {
    const CellMoments m = cell_moments(compute_partition(region, cfg), phi);
    cfg[0] = step_conventional(cfg[0], conventional_gradient(0, cfg, m), 0.1, 0.05);
  }
  EXPECT_LT((cfg[0] - Vec2(2.0, 1.4)).norm(), 1e-3);
}
