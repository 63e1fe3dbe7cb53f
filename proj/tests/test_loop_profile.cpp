#include <gtest/gtest.h>

#include "oracles.hpp"
#include "transverse/transverse.hpp"

using namespace transverse;

namespace {

std::vector<HamiltonianModel> builtins() {
  return {make_neumann(1.0, 2.0), make_neumann(1.75, 2.0), make_pendula_identical(CosineSeries{{0.1}}),
          make_pendula_identical(CosineSeries{{0.25, -0.125}}), make_pendula_weak(1.0), make_pendula_weak(2.0),
          make_pendula_weak(3.0)};
}

}  // namespace

TEST(LoopProfile, PendulaClosedForms) {
  const LoopProfile p = loop_profile(make_pendula_identical(CosineSeries{{0.2}}));
  for (double q : linspace(0.0, kTwoPi, 41)) {
    EXPECT_NEAR(p.dS0(q), 4.0 * std::sin(0.5 * q), 1e-13);
    EXPECT_NEAR(p.S1(q), 2.0 * std::sin(0.5 * q), 1e-13);
    EXPECT_NEAR(p.beta(q), 0.5, 1e-15);
  }
}

TEST(LoopProfile, NeumannClosedForms) {
  const double l1 = 1.5;
  const LoopProfile p = loop_profile(make_neumann(l1, 2.5));
  for (double q : linspace(0.0, 10.0, 41)) {
    EXPECT_NEAR(p.dS0(q), oracle::neumann_dS0(l1, q), 1e-14);
    EXPECT_EQ(p.S1(q), 0.0);
  }
}

TEST(LoopProfile, VanishesAtEquilibrium) {
  for (const auto& m : builtins()) {
    const LoopProfile p = loop_profile(m);
    EXPECT_EQ(p.dS0(0.0), 0.0) << m.name;
    EXPECT_NEAR(p.S1(0.0), 0.0, 1e-15) << m.name;
  }
}

TEST(LoopProfile, StructuralIdentitiesOnBuiltins) {
  for (const auto& m : builtins()) {
    const LoopProfile p = loop_profile(m);
    const auto grid = linspace(p.interval.lo, p.interval.hi, 200);
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      const double q = grid[i];
      EXPECT_GT(p.dS0(q), 0.0) << m.name << " " << q;
      // Energy on the loop: beta S0'^2 / 2 + V0 = 0.
      EXPECT_NEAR(0.5 * p.beta(q) * p.dS0(q) * p.dS0(q) + m.V0(q), 0.0, 1e-10) << m.name;
      EXPECT_NEAR(p.S1(q), -m.b120(q) / m.b220(q) * p.dS0(q), 1e-9 * std::max(1.0, std::abs(p.S1(q))));
      EXPECT_LT(std::abs(restriction_residual(p, m, q)), 1e-8) << m.name << " " << q;
    }
  }
}

TEST(LoopProfile, AntiperiodicOnTorus) {
  for (const auto& m : {make_pendula_identical(CosineSeries{{0.1, 0.05}}), make_pendula_weak(2.0)}) {
    const LoopProfile p = loop_profile(m);
    for (double q : linspace(0.1, kTwoPi - 0.1, 30)) {
      EXPECT_NEAR(p.dS0(q + kTwoPi), -p.dS0(q), 1e-10);
      EXPECT_NEAR(p.S1(q + kTwoPi), -p.S1(q), 1e-10);
    }
  }
}

TEST(RestrictionResidual, PendulaAtQuarterTurn) {
  const HamiltonianModel m = make_pendula_identical(CosineSeries{{0.0}});
  const LoopProfile p = loop_profile(m);
  // cos(q/2) * (1/2) * 4 sin(q/2) = sin q = -V1.
  EXPECT_NEAR(restriction_residual(p, m, 0.5 * kPi), 0.0, 1e-12);
}

TEST(RestrictionResidual, NeumannExactlyZero) {
  const HamiltonianModel m = make_neumann(1.0, 2.0);
  const LoopProfile p = loop_profile(m);
  for (double q : {0.5, 2.0, 7.0}) EXPECT_EQ(restriction_residual(p, m, q), 0.0);
}

TEST(RestrictionResidual, DetectsCorruptedV1) {
  HamiltonianModel m = make_pendula_identical(CosineSeries{{0.1}});
  const LoopProfile p = loop_profile(m);
  HamiltonianModel bad = m;
  bad.V1 = [](double q) { return -std::sin(q) + 0.1; };
  EXPECT_NEAR(restriction_residual(p, bad, 1.0), 0.1, 1e-12);
  EXPECT_THROW(loop_profile(bad), InconsistentModelError);
}

TEST(LoopProfileErrors, NoLoopWhenPotentialHasWrongSign) {
  HamiltonianModel m = make_neumann(1.0, 2.0);
  m.V0 = [](double q) { return q * q; };
  EXPECT_THROW(loop_profile(m), NoLoopError);
}

TEST(InnerTime, PendulaLoopIsArctangent) {
  const LoopProfile p = loop_profile(make_pendula_identical(CosineSeries{{0.1}}));
  for (double t : {-1.0, 1.0, 2.5}) {
    const InnerPosition x = inner_time_param(p, kPi, t);
    EXPECT_FALSE(x.clipped);
    EXPECT_NEAR(x.q1, 4.0 * std::atan(std::exp(t)), 1e-9);
  }
  EXPECT_EQ(inner_time_param(p, kPi, 0.0).q1, kPi);
}

TEST(InnerTime, NeumannInnerDynamicsIsLinear) {
  const LoopProfile p = loop_profile(make_neumann(1.0, 2.0));
  EXPECT_NEAR(inner_time_param(p, 2.0, 1.0).q1, 2.0 * std::exp(1.0), 1e-8);
}

TEST(InnerTime, MonotoneAndReproducesMomentum) {
  // Along the motion, p1(t) = dS0(q1(t)) equals 2 sin(q1/2) * 2 on the pendula loop.
  const LoopProfile p = loop_profile(make_pendula_identical(CosineSeries{{0.0}}));
  double prev = 0.0;
  for (double t : linspace(-3.0, 3.0, 13)) {
    const double q = inner_time_param(p, kPi, t).q1;
    EXPECT_GT(q, prev);
    prev = q;
    const double q_exact = 4.0 * std::atan(std::exp(t));
    EXPECT_NEAR(p.dS0(q), 4.0 * std::sin(0.5 * q_exact), 1e-8);
  }
}

TEST(InnerTime, ClipsAtTheEndOfTheInterval) {
  const LoopProfile p = loop_profile(make_neumann(1.0, 2.0));
  const InnerPosition x = inner_time_param(p, 2.0, 10.0);
  EXPECT_TRUE(x.clipped);
  EXPECT_EQ(x.q1, p.interval.hi);
  EXPECT_THROW(inner_time_param(p, 0.0, 1.0), DomainError);
}

TEST(LoopAction, IdenticalPendula) {
  EXPECT_NEAR(loop_action_sigma(loop_profile(make_pendula_identical(CosineSeries{{0.3}}))), 16.0, 1e-12);
}

TEST(LoopAction, WeakPendulaLambdaOne) {
  EXPECT_NEAR(loop_action_sigma(loop_profile(make_pendula_weak(1.0))), 16.0, 1e-12);
}

TEST(LoopAction, ScalesLinearly) {
  LoopProfile p = loop_profile(make_pendula_identical(CosineSeries{{0.0}}));
  const double s = loop_action_sigma(p);
  auto base = p.dS0;
  p.dS0 = [base](double q) { return 2.5 * base(q); };
  EXPECT_NEAR(loop_action_sigma(p), 2.5 * s, 1e-12);
}

TEST(LoopAction, RejectsNonPeriodic) {
  EXPECT_THROW(loop_action_sigma(loop_profile(make_neumann(1.0, 2.0))), UnsupportedOperation);
}
