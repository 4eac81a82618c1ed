#include <gtest/gtest.h>

#include <random>

#include <Eigen/Dense>

#include "lcvx/errors.hpp"
#include "lcvx/symmat.hpp"
#include "oracles.hpp"

using lcvx::SymMat;

TEST(SymMat, ConstructionSymmetrizesSmallDrift) {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0 + 1e-12, 2.0, 3.0;
  const SymMat s(m);
  EXPECT_EQ(s(0, 1), s(1, 0));
}

TEST(SymMat, RejectsLargeAsymmetry) {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 2.5, 3.0;
  EXPECT_THROW(SymMat{m}, lcvx::SymmetryError);
}

TEST(SymMat, InnerProductIsTraceOfProduct) {
  const auto a = SymMat::from_rows({{1, 2}, {2, 3}});
  const auto b = SymMat::from_rows({{4, -1}, {-1, 2}});
  // 1·4 + 2·(-1)·2 + 3·2
  EXPECT_DOUBLE_EQ(a.inner(b), 6.0);
}

TEST(SymEig, IdentityHasUnitEigenvalues) {
  const auto d = lcvx::sym_eig(SymMat::identity(3));
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(d.values(k), 1.0, 1e-14);
}

TEST(SymEig, DiagonalEigenvaluesAreSorted) {
  const auto d = lcvx::sym_eig(SymMat::diagonal(Eigen::Vector2d(5.0, -2.0)));
  EXPECT_NEAR(d.values(0), -2.0, 1e-14);
  EXPECT_NEAR(d.values(1), 5.0, 1e-14);
}

TEST(SymEig, TwoByTwoMatchesCharacteristicPolynomial) {
  const auto [lo, hi] = oracle::sym2_eigenvalues(2, 1, 2);
  ASSERT_DOUBLE_EQ(lo, 1.0);
  ASSERT_DOUBLE_EQ(hi, 3.0);
  const auto d = lcvx::sym_eig(SymMat::from_rows({{2, 1}, {1, 2}}));
  EXPECT_NEAR(d.values(0), lo, 1e-12);
  EXPECT_NEAR(d.values(1), hi, 1e-12);
}

TEST(Extremes, MaxMinEig) {
  EXPECT_NEAR(lcvx::max_eig(SymMat::identity(2)), 1.0, 1e-14);
  EXPECT_NEAR(lcvx::min_eig(SymMat::identity(2)), 1.0, 1e-14);
  const auto d = SymMat::diagonal(Eigen::Vector2d(-1.0, 4.0));
  EXPECT_NEAR(lcvx::max_eig(d), 4.0, 1e-14);
  EXPECT_NEAR(lcvx::min_eig(d), -1.0, 1e-14);
  const auto [lo, hi] = oracle::sym2_eigenvalues(0, 3, 0);
  const auto off = SymMat::from_rows({{0, 3}, {3, 0}});
  EXPECT_NEAR(lcvx::max_eig(off), hi, 1e-12);
  EXPECT_NEAR(lcvx::min_eig(off), lo, 1e-12);
}

TEST(Definiteness, IsNsdExamples) {
  EXPECT_TRUE(lcvx::is_nsd(-SymMat::identity(2), 0.0));
  EXPECT_TRUE(lcvx::is_nsd(SymMat::diagonal(Eigen::Vector2d(1e-9, -1.0)), 1e-8));
  EXPECT_FALSE(lcvx::is_nsd(SymMat::from_rows({{2, 1}, {1, 2}}), 0.0));
}

TEST(Definiteness, PsdAndStrictVariants) {
  EXPECT_TRUE(lcvx::is_psd(SymMat::identity(2), 0.0));
  EXPECT_FALSE(lcvx::is_psd(SymMat::diagonal(Eigen::Vector2d(1.0, -1e-6)), 1e-8));
  EXPECT_TRUE(lcvx::is_negative_definite(-SymMat::identity(2), 0.5));
  EXPECT_FALSE(lcvx::is_negative_definite(SymMat::zero(2)));
}

TEST(Schur, ZeroCoupling) {
  const auto s = lcvx::schur_complement(SymMat::from_rows({{4, 0}, {0, 2}}), 1);
  EXPECT_NEAR(s(0, 0), 4.0, 1e-14);
}

TEST(Schur, ScalarFormula) {
  // 1 - 2·(1/4)·2
  const auto s = lcvx::schur_complement(SymMat::from_rows({{1, 2}, {2, 4}}), 1);
  EXPECT_NEAR(s(0, 0), 0.0, 1e-14);
}

TEST(Schur, DiscreteLyapunovBlock) {
  // P = 1, A = 0, B = 1, M = 0, ε = 0.5: [[-1 + 0.5, 0], [0, -1]].
  const auto s = lcvx::schur_complement(SymMat::from_rows({{-0.5, 0}, {0, -1}}), 1);
  EXPECT_NEAR(s(0, 0), -0.5, 1e-14);
}

TEST(Schur, SingularBlockThrows) {
  EXPECT_THROW(lcvx::schur_complement(SymMat::from_rows({{1, 1}, {1, 0}}), 1), lcvx::SingularBlock);
}

TEST(Cholesky, Examples) {
  EXPECT_TRUE(lcvx::cholesky(SymMat::identity(2)).isApprox(Eigen::Matrix2d::Identity()));
  Eigen::Matrix2d d;
  d << 2, 0, 0, 3;
  EXPECT_TRUE(lcvx::cholesky(SymMat::diagonal(Eigen::Vector2d(4, 9))).isApprox(d));
  const Eigen::Matrix2d hand = oracle::chol2(4, 2, 5);
  Eigen::Matrix2d expected;
  expected << 2, 0, 1, 2;
  ASSERT_TRUE(hand.isApprox(expected));
  const Eigen::MatrixXd l = lcvx::cholesky(SymMat::from_rows({{4, 2}, {2, 5}}));
  EXPECT_LE((l - expected).norm(), 1e-14);
}

TEST(Cholesky, IndefiniteThrows) {
  EXPECT_THROW(lcvx::cholesky(SymMat::from_rows({{1, 2}, {2, 1}})), lcvx::NotPositiveDefinite);
  EXPECT_THROW(lcvx::cholesky(SymMat::zero(2)), lcvx::NotPositiveDefinite);
}

TEST(Inverse, InversePdAndLogDet) {
  const auto s = SymMat::from_rows({{4, 2}, {2, 5}});
  const Eigen::MatrixXd prod = s.matrix() * lcvx::inverse_pd(s).matrix();
  EXPECT_LE((prod - Eigen::Matrix2d::Identity()).norm(), 1e-14);
  EXPECT_NEAR(lcvx::log_det_pd(s), std::log(16.0), 1e-14);
}

TEST(SymEigProperty, ReconstructionAndOrthonormality1000Trials) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 8);
  std::uniform_real_distribution<double> scale_exp(-3.0, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = dim(rng);
    const SymMat s(oracle::random_symmetric(rng, n, std::pow(10.0, scale_exp(rng))));
    const auto d = lcvx::sym_eig(s);
    const Eigen::MatrixXd rec = d.vectors * d.values.asDiagonal() * d.vectors.transpose();
    ASSERT_LE((rec - s.matrix()).norm(), 1e-10 * std::max(1.0, s.frobenius_norm())) << "trial " << trial;
    ASSERT_LE((d.vectors.transpose() * d.vectors - Eigen::MatrixXd::Identity(n, n)).norm(), 1e-10);
    for (int k = 1; k < n; ++k) ASSERT_LE(d.values(k - 1), d.values(k));
  }
}

TEST(SymEigProperty, MaxEigAgreesWithPowerIteration) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 6;
    const SymMat s(oracle::random_symmetric(rng, n));
    EXPECT_NEAR(lcvx::max_eig(s), oracle::max_eig_power(s.matrix()), 1e-6);
  }
}

TEST(DefinitenessProperty, NsdBothWaysOnlyForZero) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 8;
    const SymMat s(oracle::random_symmetric(rng, n) * (trial % 5 == 0 ? 0.0 : 1.0));
    const bool both = lcvx::is_nsd(s, 0.0) && lcvx::is_nsd(-s, 0.0);
    const double max_abs = s.matrix().cwiseAbs().maxCoeff();
    EXPECT_EQ(both, max_abs <= 1e-10) << "trial " << trial;
  }
}

TEST(CholeskyProperty, FactorReproducesMatrix) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 8;
    const SymMat s(oracle::random_spd(rng, n));
    const Eigen::MatrixXd l = lcvx::cholesky(s);
    ASSERT_TRUE(l.isLowerTriangular());
    ASSERT_LE((l * l.transpose() - s.matrix()).norm(), 1e-10 * s.frobenius_norm());
  }
}

TEST(SchurProperty, BlockNegativeDefiniteEquivalence500Trials) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_real_distribution<double> shift(-2.0, 6.0);
  int agree_negative = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int nx = dim(rng);
    const int nz = dim(rng);
    const int n = nx + nz;
    // Shifting a random symmetric matrix makes both outcomes common.
    Eigen::MatrixXd m = oracle::random_symmetric(rng, n) - shift(rng) * Eigen::MatrixXd::Identity(n, n);
    const SymMat full(m);
    const SymMat z(m.bottomRightCorner(nz, nz));
    const bool lhs = lcvx::max_eig(full) < 0.0;
    bool rhs = lcvx::max_eig(z) < 0.0;
    if (rhs) rhs = lcvx::max_eig(lcvx::schur_complement(full, nx)) < 0.0;
    // Cases within rounding of the boundary carry no information.
    if (std::abs(lcvx::max_eig(full)) < 1e-9) continue;
    ASSERT_EQ(lhs, rhs) << "trial " << trial;
    agree_negative += lhs ? 1 : 0;
  }
  EXPECT_GT(agree_negative, 50);
  EXPECT_LT(agree_negative, 450);
}
