#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lcvx/control.hpp"
#include "lcvx/convexify.hpp"
#include "lcvx/errors.hpp"
#include "oracles.hpp"

using lcvx::Assignment;
using lcvx::EpigraphPoint;
using lcvx::SymMat;

namespace {

Eigen::MatrixXd s(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

lcvx::LtiSystem double_integrator(lcvx::Clock clock = lcvx::Clock::ContinuousTime) {
  lcvx::LtiSystem sys;
  sys.A = Eigen::MatrixXd(2, 2);
  sys.A << 0, 1, 0, 0;
  sys.B = Eigen::MatrixXd(2, 1);
  sys.B << 0, 1;
  sys.clock = clock;
  return sys;
}

}  // namespace

TEST(Forward, Example1) {
  const auto c = lcvx::example1_map();
  EXPECT_EQ(lcvx::forward(c, {{"x", s(2.0)}}).at("v")(0, 0), -4.0);
}

TEST(Forward, Example2FixedPoint) {
  const auto c = lcvx::example2_map();
  const auto v = lcvx::forward(c, {{"x1", s(1.0)}, {"x2", s(1.0)}});
  EXPECT_EQ(v.at("v1")(0, 0), 1.0);
  EXPECT_EQ(v.at("v2")(0, 0), 1.0);
}

TEST(Forward, ControlCtProduct) {
  const auto c = lcvx::control_map(double_integrator(), 1e-3);
  Eigen::MatrixXd F(1, 2);
  F << 1, 0;
  const auto v = lcvx::forward(c, {{"P", 2.0 * Eigen::MatrixXd::Identity(2, 2)}, {"F", F}, {"t", s(0.0)}});
  Eigen::MatrixXd M(1, 2);
  M << 2, 0;
  EXPECT_EQ(v.at("M"), M);
}

TEST(Forward, ControlSingularP) {
  const auto c = lcvx::control_map(double_integrator(), 1e-3);
  Eigen::MatrixXd P(2, 2);
  P << 1, 1, 1, 1;
  EXPECT_THROW(lcvx::forward(c, {{"P", P}, {"F", Eigen::MatrixXd::Zero(1, 2)}, {"t", s(0.0)}}), lcvx::SingularP);
}

TEST(Recover, Example1) {
  const auto c = lcvx::example1_map();
  EXPECT_EQ(lcvx::recover(c, {{"v", s(-4.0)}}).at("x")(0, 0), 2.0);
  EXPECT_THROW(lcvx::recover(c, {{"v", s(0.5)}}), lcvx::DomainViolation);
}

TEST(Recover, Example2) {
  const auto c = lcvx::example2_map();
  const Assignment v{{"v1", s(4.0)}, {"v2", s(8.0)}, {"s", s(16.0)}};
  const auto x = lcvx::recover(c, v);
  EXPECT_NEAR(x.at("x1")(0, 0), 4.0, 1e-15);
  EXPECT_NEAR(x.at("x2")(0, 0), std::sqrt(2.0), 1e-15);
  const auto back = lcvx::forward(c, x);
  EXPECT_NEAR(back.at("v2")(0, 0), 8.0, 1e-13);
  EXPECT_THROW(lcvx::recover(c, {{"v1", s(0.5)}, {"v2", s(1.0)}, {"s", s(0.0)}}), lcvx::DomainViolation);
}

TEST(Recover, ControlCtGain) {
  const auto c = lcvx::control_map(double_integrator(), 1e-3);
  Eigen::MatrixXd M(1, 2);
  M << 2, 0;
  const auto x = lcvx::recover(c, {{"P", 2.0 * Eigen::MatrixXd::Identity(2, 2)}, {"M", M}, {"t", s(0.0)}});
  EXPECT_NEAR(x.at("F")(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(x.at("F")(0, 1), 0.0, 1e-15);
}

TEST(Recover, ControlNeedsPositiveDefiniteP) {
  const auto c = lcvx::control_map(double_integrator(), 1e-3);
  EXPECT_THROW(lcvx::recover(c, {{"P", -Eigen::MatrixXd::Identity(2, 2)}, {"M", Eigen::MatrixXd::Zero(1, 2)},
                                 {"t", s(0.0)}}),
               lcvx::DomainViolation);
}

TEST(Transport, ObjectiveAndConstraintsAgreeOnRecoveredPoints) {
  const auto c = lcvx::example2_map();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> v1(1.0, 3.0);
  std::uniform_real_distribution<double> v2(1.0, 5.0);
  for (int k = 0; k < 100; ++k) {
    const Assignment v{{"v1", s(v1(rng))}, {"v2", s(v2(rng))}, {"s", s(0.0)}};
    const auto x = lcvx::recover(c, v);
    EXPECT_NEAR(lcvx::objective_value(c.source, x), c.target_objective(v), 1e-12);
    for (std::size_t i = 0; i < c.source.constraints.size(); ++i) {
      EXPECT_NEAR(lcvx::eval_constraint(c.source.constraints[i], x)(0, 0), c.target_constraint(i, v)(0, 0), 1e-12);
    }
  }
}

TEST(Surjection, Example1) {
  const auto r = lcvx::surjection_spotcheck(lcvx::example1_map(), 100, 0);
  EXPECT_TRUE(r.pass) << r.message;
  EXPECT_EQ(r.samples, 100);
  EXPECT_LE(r.worst_roundtrip, 1e-8);
}

TEST(Surjection, Example2) {
  const auto r = lcvx::surjection_spotcheck(lcvx::example2_map(), 100, 0);
  EXPECT_TRUE(r.pass) << r.message;
  EXPECT_LE(r.worst_roundtrip, 1e-8);
  EXPECT_LE(r.worst_source_violation, 1e-7);
}

TEST(Surjection, ControlCtDoubleIntegrator) {
  const auto r = lcvx::surjection_spotcheck(lcvx::control_map(double_integrator(), 1e-3), 50, 0);
  EXPECT_TRUE(r.pass) << r.message;
  EXPECT_LE(r.worst_roundtrip, 1e-8);
  EXPECT_LE(r.worst_transport, 1e-8);
}

TEST(Surjection, ControlDt) {
  lcvx::LtiSystem sys;
  sys.A = s(1.2);
  sys.B = s(1.0);
  sys.clock = lcvx::Clock::DiscreteTime;
  const auto r = lcvx::surjection_spotcheck(lcvx::control_map(sys, 1e-3), 50, 3);
  EXPECT_TRUE(r.pass) << r.message;
}

TEST(Surjection, InfeasibleRegionThrows) {
  lcvx::LtiSystem sys;
  sys.A = s(1.0);
  sys.B = s(0.0);
  EXPECT_THROW(lcvx::surjection_spotcheck(lcvx::control_map(sys, 0.1), 10, 0), lcvx::SamplingFailed);
}

TEST(Surjection, DeterministicInSeed) {
  const auto c = lcvx::example2_map();
  const auto a = lcvx::sample_region(c.region, 20, 5);
  const auto b = lcvx::sample_region(c.region, 20, 5);
  ASSERT_EQ(a.size(), 20u);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k], b[k]);
  const auto other = lcvx::sample_region(c.region, 20, 6);
  EXPECT_NE(a[0], other[0]);
}

TEST(Surjection, SamplesAreStrictlyFeasible) {
  const auto c = lcvx::control_map(double_integrator(), 1e-3);
  for (const auto& v : lcvx::sample_region(c.region, 30, 9)) {
    for (double r : lcvx::residuals(c.region, v)) EXPECT_LT(r, 0.0);
  }
}

TEST(Epigraph, SourceMembershipExamples) {
  const auto p = lcvx::example1_problem();
  EXPECT_TRUE(lcvx::epigraph_member_source(p, EpigraphPoint{{SymMat::zero(1)}, 1.0}, {{"x", s(1.0)}}));
  EXPECT_FALSE(lcvx::epigraph_member_source(p, EpigraphPoint{{SymMat::zero(1)}, 0.5}, {{"x", s(1.0)}}));
  EXPECT_TRUE(lcvx::epigraph_member_source(p, EpigraphPoint{{SymMat::identity(1)}, 0.0}, {{"x", s(0.0)}}));
}

TEST(Epigraph, TargetMembershipFollowsForwardMap) {
  const auto c = lcvx::example1_map();
  // x = 0 maps to v = 0: Φ'(0) = 1 ⪯ 1 and f'(0) = 0 ≤ 0.
  EXPECT_TRUE(lcvx::epigraph_member_target(c, EpigraphPoint{{SymMat::identity(1)}, 0.0}, {{"v", s(0.0)}}));
  EXPECT_FALSE(lcvx::epigraph_member_target(c, EpigraphPoint{{SymMat::zero(1)}, 0.0}, {{"v", s(0.0)}}));
}

TEST(Inclusion, Example1) {
  const auto r = lcvx::inclusion_spotcheck(lcvx::example1_problem(), lcvx::example1_map(), 200, 0);
  EXPECT_TRUE(r.pass) << r.message;
  EXPECT_EQ(r.samples, 200);
}

TEST(Inclusion, Example2) {
  const auto r = lcvx::inclusion_spotcheck(lcvx::example2_problem(), lcvx::example2_map(), 200, 0);
  EXPECT_TRUE(r.pass) << r.message;
}

TEST(Inclusion, CorruptedMapIsCaught) {
  auto c = lcvx::example1_map();
  c.forward = [](const Assignment& x) {
    const double xv = x.at("x")(0, 0);
    return Assignment{{"v", s(-xv * xv + 1.0)}};
  };
  const auto r = lcvx::inclusion_spotcheck(lcvx::example1_problem(), c, 200, 0);
  EXPECT_FALSE(r.pass);
  EXPECT_GE(r.failures, 1);
}

TEST(ControlMap, RejectsNonPositiveEpsilon) {
  EXPECT_THROW(lcvx::control_map(double_integrator(), 0.0), lcvx::Error);
}

TEST(ControlMap, GainBoundScales) {
  const auto sys = double_integrator();
  EXPECT_NEAR(lcvx::gain_bound(sys), 1e2 * 2 * (1 + 1) / 1, 1e-12);
}
