#include <gtest/gtest.h>

#include <random>

#include "transverse/transverse.hpp"

using namespace transverse;

namespace {

/// Roots of the characteristic polynomial of a general 2x2 matrix; false if complex.
bool char_roots(const Mat2& m, double& r1, double& r2) {
  const double tr = m.trace(), det = m.det();
  const double disc = tr * tr - 4.0 * det;
  if (disc < 0.0) return false;
  r1 = 0.5 * (tr - std::sqrt(disc));
  r2 = 0.5 * (tr + std::sqrt(disc));
  return true;
}

std::vector<HamiltonianModel> builtins() {
  return {make_neumann(1.0, 2.0),  make_neumann(0.5, 1.5),  make_pendula_identical(CosineSeries{{0.0}}),
          make_pendula_identical(CosineSeries{{0.25, -0.125}}), make_pendula_weak(1.0), make_pendula_weak(3.0)};
}

}  // namespace

TEST(CheckPositiveDefinite, Basics) {
  EXPECT_TRUE(check_positive_definite(Mat2::identity()));
  EXPECT_FALSE(check_positive_definite(Mat2::sym(1, 2, 1)));
  EXPECT_FALSE(check_positive_definite(Mat2::sym(-1, 0, -1)));
  EXPECT_TRUE(check_positive_definite(linearize(make_neumann(1.0, 2.0)).Eu));
}

TEST(CheckPositiveDefinite, ProductEigenvaluesPositiveIffFactorDefinite) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int definite = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Mat2 R{u(rng), u(rng), u(rng), u(rng)};
    const Mat2 G = R.transpose() * R + 0.1 * Mat2::identity();
    const Mat2 Q = Mat2::sym(u(rng), u(rng), u(rng));
    double r1 = 0, r2 = 0;
    const bool real = char_roots(G * Q, r1, r2);
    const bool all_positive = real && r1 > 0.0 && r2 > 0.0;
    EXPECT_EQ(all_positive, check_positive_definite(Q)) << "trial " << trial;
    definite += check_positive_definite(Q);
  }
  EXPECT_GT(definite, 0);
  EXPECT_LT(definite, 50);
}

TEST(Linearize, DiagonalCase) {
  const Linearization lin = linearize(Mat2::diag(4, 9), Mat2::identity());
  EXPECT_NEAR(lin.lambda1, 2.0, 1e-15);
  EXPECT_NEAR(lin.lambda2, 3.0, 1e-15);
  EXPECT_NEAR(lin.Eu.a, 2.0, 1e-15);
  EXPECT_NEAR(lin.Eu.d, 3.0, 1e-15);
  EXPECT_NEAR(lin.Eu.b, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(lin.Es.a, -2.0);
}

TEST(Linearize, NeumannExponents) {
  const Linearization lin = linearize(make_neumann(1.0, 2.0));
  EXPECT_NEAR(lin.lambda1, 1.0, 1e-8);
  EXPECT_NEAR(lin.lambda2, 2.0, 1e-14);
  EXPECT_NEAR(std::abs(lin.M.a), 1.0, 1e-12);
  EXPECT_NEAR(lin.M.c, 0.0, 1e-12);
  EXPECT_NEAR(lin.Eu.a, 1.0, 1e-8);
  EXPECT_NEAR(lin.Eu.d, 2.0, 1e-12);
  EXPECT_NEAR(lin.Eu.b, 0.0, 1e-12);
}

TEST(Linearize, LoopDirectionFirstEvenWhenLarger) {
  // Exponent along q1 is 3, transverse 1: the axis-aligned one still comes first.
  const Linearization lin = linearize(Mat2::diag(9, 1), Mat2::identity());
  EXPECT_NEAR(lin.lambda1, 3.0, 1e-15);
  EXPECT_NEAR(lin.lambda2, 1.0, 1e-15);
}

TEST(Linearize, ExponentsMatchCharacteristicPolynomial) {
  for (const auto& m : builtins()) {
    const Linearization lin = linearize(m);
    double r1 = 0, r2 = 0;
    ASSERT_TRUE(char_roots(lin.Bmat * lin.A, r1, r2));
    const double a = lin.lambda1 * lin.lambda1, b = lin.lambda2 * lin.lambda2;
    EXPECT_NEAR(std::min(a, b), r1, 1e-10 * std::max(1.0, r2)) << m.name;
    EXPECT_NEAR(std::max(a, b), r2, 1e-10 * std::max(1.0, r2)) << m.name;
  }
}

TEST(Linearize, IdentitiesOnBuiltins) {
  for (const auto& m : builtins()) {
    const Linearization lin = linearize(m);
    EXPECT_LT(eigen_residual(lin), 1e-10) << m.name;
    EXPECT_LT(generating_identity_residual(lin), 1e-10) << m.name;
    EXPECT_TRUE(check_positive_definite(lin.Eu)) << m.name;
  }
}

TEST(Linearize, SeparablePendulaHaveUnitExponents) {
  const Linearization lin = linearize(make_pendula_identical(CosineSeries{{0.0}}));
  EXPECT_NEAR(lin.A.a, 2.0, 1e-8);
  EXPECT_NEAR(lin.A.b, 1.0, 1e-12);
  EXPECT_NEAR(lin.A.d, 1.0, 1e-14);
  EXPECT_NEAR(lin.lambda1, 1.0, 1e-8);
  EXPECT_NEAR(lin.lambda2, 1.0, 1e-8);
}

TEST(Linearize, TransverseEntryIsInitialSlope) {
  for (const auto& m : builtins()) {
    const Linearization lin = linearize(m);
    const RiccatiInitial init = riccati_initial(riccati_coefficients(m, loop_profile(m)));
    EXPECT_NEAR(lin.Eu.d, init.T0, 1e-10 * std::max(1.0, init.T0)) << m.name;
  }
}

TEST(Linearize, RejectsNonHyperbolic) {
  EXPECT_THROW(linearize(make_pendula_identical_unchecked(CosineSeries{{0.6}})), HypothesisError);
  EXPECT_THROW(linearize(Mat2::diag(1, -1), Mat2::identity()), HypothesisError);
}
