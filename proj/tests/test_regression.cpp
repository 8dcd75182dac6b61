#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "cinderella/regression.hpp"
#include "cinderella/rng.hpp"
#include "test_util.hpp"

using namespace cinderella;
using test_support::code_of;

TEST(Ridge, InitIsScaledIdentity) {
  const auto s = ridge_init(2, 1.0);
  EXPECT_TRUE(s.lam().isApprox(Eigen::MatrixXd::Identity(2, 2)));
  const auto t = ridge_init(1, 2.0);
  EXPECT_DOUBLE_EQ(t.lam_inv()(0, 0), 0.5);
  EXPECT_EQ(ridge_init(3, 1.0).count(), 0u);
  EXPECT_EQ(code_of([] { ridge_init(2, 0.0); }), ErrorCode::NonPositiveLambda);
  EXPECT_EQ(code_of([] { ridge_init(2, -1.0); }), ErrorCode::NonPositiveLambda);
}

TEST(Ridge, RankOneUpdateTwoByTwo) {
  auto s = ridge_init(2, 1.0);
  ridge_update(s, std::vector<double>{1.0, 1.0}, 0.0);
  Eigen::MatrixXd lam(2, 2);
  lam << 2, 1, 1, 2;
  Eigen::MatrixXd inv(2, 2);
  inv << 2, -1, -1, 2;
  inv /= 3.0;
  EXPECT_LE((s.lam() - lam).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((s.lam_inv() - inv).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Ridge, ZeroFeatureOnlyBumpsCount) {
  auto s = ridge_init(3, 1.0);
  ridge_update(s, std::vector<double>{0, 0, 0}, 1.0);
  EXPECT_EQ(s.count(), 1u);
  EXPECT_TRUE(s.lam().isApprox(Eigen::MatrixXd::Identity(3, 3)));
}

TEST(Ridge, RejectsNonFinite) {
  auto s = ridge_init(2, 1.0);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(code_of([&] { ridge_update(s, std::vector<double>{1.0, 0.0}, nan); }), ErrorCode::NonFiniteInput);
  EXPECT_EQ(code_of([&] { ridge_update(s, std::vector<double>{nan, 0.0}, 1.0); }), ErrorCode::NonFiniteInput);
  EXPECT_EQ(s.count(), 0u);
}

TEST(ThetaHat, FreshIsZeroAndSingleUpdateHalves) {
  auto s = ridge_init(3, 1.0);
  EXPECT_EQ(theta_hat(s), Eigen::VectorXd::Zero(3));
  ridge_update(s, std::vector<double>{1, 0, 0}, 1.0);
  const Eigen::VectorXd t = theta_hat(s);
  EXPECT_DOUBLE_EQ(t[0], 0.5);
  EXPECT_DOUBLE_EQ(t[1], 0.0);
  EXPECT_DOUBLE_EQ(t[2], 0.0);
}

TEST(ThetaHat, RecoversNoiselessLinearModel) {
  Rng rng = make_stream({21, 0, 0, 0, StreamPurpose::Check});
  const Eigen::Vector3d truth(0.4, -0.7, 0.2);
  auto s = ridge_init(3, 1.0);
  std::vector<double> phi(3);
  for (int t = 0; t < 500; ++t) {
    for (double& x : phi) x = uniform(rng, -1.0, 1.0);
    ridge_update(s, phi, Eigen::Map<const Eigen::Vector3d>(phi.data()).dot(truth));
  }
  EXPECT_LE((theta_hat(s) - truth).norm(), 0.05);
}

TEST(InvNorm, Examples) {
  const auto s = ridge_init(2, 1.0);
  EXPECT_DOUBLE_EQ(mahalanobis_inv_norm(s, std::vector<double>{3.0, 4.0}), 5.0);
  EXPECT_DOUBLE_EQ(mahalanobis_inv_norm(s, std::vector<double>{0.0, 0.0}), 0.0);
  // lam = diag(4, 1): lambda = 1 plus an update along e1 of size sqrt(3).
  auto d = ridge_init(2, 1.0);
  ridge_update(d, std::vector<double>{std::sqrt(3.0), 0.0}, 0.0);
  EXPECT_NEAR(mahalanobis_inv_norm(d, std::vector<double>{2.0, 0.0}), 1.0, 1e-15);
}

TEST(DesignNorm, MatchesQuadraticForm) {
  auto s = ridge_init(2, 2.0);
  ridge_update(s, std::vector<double>{1.0, 1.0}, 0.0);
  const Eigen::Vector2d x(1.0, -2.0);
  EXPECT_NEAR(s.design_norm(x), std::sqrt(x.dot(s.lam() * x)), 1e-15);
}

// Property: Sherman-Morrison inverse tracks the direct inverse, across the
// periodic refactorization.
TEST(RidgeProperty, IncrementalInverseMatchesDirect) {
  Rng rng = make_stream({22, 0, 0, 0, StreamPurpose::Check});
  for (std::size_t d : {1u, 4u, 10u, 16u}) {
    auto s = ridge_init(d, 1.0);
    std::vector<double> phi(d);
    for (int t = 0; t < 1000; ++t) {
      for (double& x : phi) x = uniform(rng, -1.0, 1.0);
      ridge_update(s, phi, uniform(rng, -1.0, 2.0));
    }
    const Eigen::MatrixXd direct = s.lam().inverse();
    EXPECT_LE((s.lam_inv() - direct).cwiseAbs().maxCoeff(), 1e-8) << "d=" << d;
    EXPECT_EQ(s.count(), 1000u);
  }
}

TEST(RidgeProperty, SymmetryAfterManyUpdates) {
  Rng rng = make_stream({23, 0, 0, 0, StreamPurpose::Check});
  auto s = ridge_init(6, 1.0);
  std::vector<double> phi(6);
  for (int t = 0; t < 10000; ++t) {
    for (double& x : phi) x = uniform(rng, -1.0, 1.0);
    ridge_update(s, phi, 0.5);
  }
  EXPECT_LE((s.lam() - s.lam().transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((s.lam_inv() - s.lam_inv().transpose()).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.lam());
  EXPECT_GE(eig.eigenvalues().minCoeff(), 1.0 - 1e-9);
}

TEST(RidgeProperty, InverseNormNeverIncreases) {
  Rng rng = make_stream({24, 0, 0, 0, StreamPurpose::Check});
  auto s = ridge_init(4, 1.0);
  const std::vector<double> query{0.3, -0.5, 0.9, 0.1};
  double previous = mahalanobis_inv_norm(s, query);
  std::vector<double> phi(4);
  for (int t = 0; t < 2000; ++t) {
    for (double& x : phi) x = uniform(rng, -1.0, 1.0);
    ridge_update(s, phi, 0.0);
    const double now = mahalanobis_inv_norm(s, query);
    ASSERT_LE(now, previous + 1e-12);
    previous = now;
  }
}

TEST(RidgeProperty, DesignOnlyUpdateWithRebuiltTargetsMatchesUpdate) {
  Rng rng = make_stream({25, 0, 0, 0, StreamPurpose::Check});
  auto a = ridge_init(3, 1.0);
  auto b = ridge_init(3, 1.0);
  std::vector<double> phi(3);
  for (int t = 0; t < 100; ++t) {
    for (double& x : phi) x = uniform(rng, -1.0, 1.0);
    const double y = uniform(rng, 0.0, 1.0);
    a.update(phi, y);
    b.update_design(phi);
    b.accumulate_target(phi, y);
  }
  EXPECT_LE((a.theta_hat() - b.theta_hat()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(a.count(), b.count());
}
