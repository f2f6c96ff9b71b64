#include "hostcap/conic/lp.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace hostcap;
using hostcap::testing::uniform;

TEST(LpFeasibility, SimplexMembership) {
  // Convex combination of (0,0), (1,0), (0,1) hitting (0.25, 0.25).
  Eigen::MatrixXd A(3, 3);
  A << 0, 1, 0,
       0, 0, 1,
       1, 1, 1;
  const Vector b = (Vector(3) << 0.25, 0.25, 1.0).finished();
  const LpFeasibility r = solve_lp_feasibility(A, b, Vector::Zero(3));
  ASSERT_TRUE(r.feasible);
  EXPECT_LE(r.residual, 1e-9);
  EXPECT_GE(r.x.minCoeff(), -1e-12);
  EXPECT_NEAR(r.x[1], 0.25, 1e-12);
}

TEST(LpFeasibility, OutsideHullIsInfeasible) {
  Eigen::MatrixXd A(3, 3);
  A << 0, 1, 0,
       0, 0, 1,
       1, 1, 1;
  const Vector b = (Vector(3) << 0.6, 0.6, 1.0).finished();
  EXPECT_FALSE(solve_lp_feasibility(A, b, Vector::Zero(3)).feasible);
}

TEST(LpFeasibility, NegativeRightHandSide) {
  Eigen::MatrixXd A(1, 2);
  A << 1, -1;
  const LpFeasibility r = solve_lp_feasibility(A, Vector::Constant(1, -2.0), Vector::Zero(2));
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.x[0] - r.x[1], -2.0, 1e-9);
}

TEST(LpFeasibility, ShiftedLowerBounds) {
  Eigen::MatrixXd A(1, 2);
  A << 1, 1;
  EXPECT_TRUE(solve_lp_feasibility(A, Vector::Constant(1, 3.0), Vector::Constant(2, 1.5)).feasible);
  EXPECT_FALSE(solve_lp_feasibility(A, Vector::Constant(1, 2.9), Vector::Constant(2, 1.5)).feasible);
}

TEST(LpFeasibility, RedundantRows) {
  Eigen::MatrixXd A(3, 2);
  A << 1, 1,
       2, 2,
       1, 0;
  const Vector b = (Vector(3) << 1, 2, 0.3).finished();
  const LpFeasibility r = solve_lp_feasibility(A, b, Vector::Zero(2));
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.x[1], 0.7, 1e-9);
}

TEST(LpFeasibility, RandomPlantedPointsAreFound) {
  // b = A x0 with x0 >= 0 is always feasible.
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 1 + static_cast<int>(uniform_below(rng, 6));
    const int n = 1 + static_cast<int>(uniform_below(rng, 10));
    Eigen::MatrixXd A(m, n);
    Vector x0(n);
    for (int j = 0; j < n; ++j) {
      x0[j] = uniform_below(rng, 3) == 0 ? 0.0 : uniform(rng, 0, 2);
      for (int i = 0; i < m; ++i) A(i, j) = uniform(rng, -1, 1);
    }
    const LpFeasibility r = solve_lp_feasibility(A, A * x0, Vector::Zero(n));
    ASSERT_TRUE(r.feasible) << "trial " << trial;
    EXPECT_LE((A * r.x - A * x0).lpNorm<Eigen::Infinity>(), 1e-9);
    EXPECT_GE(r.x.minCoeff(), 0.0);
  }
}

TEST(LpFeasibility, RandomSeparatedPointsAreRejected) {
  // If y'A >= 0 and y'b < 0 then no x >= 0 solves A x = b (Farkas).
  Rng rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 2 + static_cast<int>(uniform_below(rng, 4));
    const int n = 1 + static_cast<int>(uniform_below(rng, 8));
    Vector y(m);
    for (int i = 0; i < m; ++i) y[i] = uniform(rng, -1, 1);
    Eigen::MatrixXd A(m, n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < m; ++i) A(i, j) = uniform(rng, -1, 1);
      // Push the column into the halfspace y'a >= 0.
      const double s = y.dot(A.col(j));
      if (s < 0) A.col(j) -= 1.01 * s * y / y.squaredNorm();
    }
    Vector b(m);
    for (int i = 0; i < m; ++i) b[i] = uniform(rng, -1, 1);
    const double s = y.dot(b);
    b -= (s + uniform(rng, 0.01, 1)) * y / y.squaredNorm();
    ASSERT_LT(y.dot(b), 0.0);
    EXPECT_FALSE(solve_lp_feasibility(A, b, Vector::Zero(n)).feasible) << "trial " << trial;
  }
}

TEST(LpFeasibility, DimensionChecks) {
  EXPECT_ERROR_KIND(solve_lp_feasibility(Eigen::MatrixXd::Ones(2, 2), Vector::Zero(3), Vector::Zero(2)),
                    ErrorKind::DimensionMismatch);
  EXPECT_ERROR_KIND(solve_lp_feasibility(Eigen::MatrixXd::Ones(2, 2), Vector::Zero(2), Vector::Zero(1)),
                    ErrorKind::DimensionMismatch);
}
