#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cinderella/config.hpp"
#include "cinderella/envs.hpp"
#include "cinderella/features.hpp"
#include "cinderella/oracle.hpp"
#include "test_util.hpp"

using namespace cinderella;
using test_support::code_of;

namespace {

std::unique_ptr<ExactLinearEnv> linear_env(int H) {
  TaylorFeatureMap features(build_partition(2, 1.0), 1);
  std::vector<Eigen::VectorXd> theta(static_cast<std::size_t>(H), Eigen::Vector3d(0.5, 0.1, 0.3) / H);
  return env_exact_linear(theta, std::move(features), 1, 1);
}

const InherentGrid kSmallGrid{17, 33, 17, 100};

} // namespace

TEST(GridDP, ZeroRewardTablesVanish) {
  const auto env = env_smooth_drift(1.0, 0.3, {RewardSpec::Kind::Zero, 0.0}, 2);
  const GridDP dp = dp_solve(*env, 17, 9);
  for (int h = 0; h < 2; ++h) {
    for (double v : dp.V[h]) EXPECT_EQ(v, 0.0);
    for (double q : dp.Q[h]) EXPECT_EQ(q, 0.0);
  }
  EXPECT_EQ(uniform_policy_value(*env, dp, std::vector<double>{0.3}), 0.0);
}

TEST(GridDP, ConstantRewardGivesUnitValue) {
  const auto env = env_smooth_drift(1.0, 0.3, {RewardSpec::Kind::Constant, -1.0}, 3);
  const GridDP dp = dp_solve(*env, 33, 9);
  for (double s : {-1.0, 0.0, 0.45}) EXPECT_NEAR(optimal_value(*env, dp, 0, std::vector<double>{s}), 1.0, 1e-9);
}

// Reference value from tests/oracles/reference_values.py.
TEST(GridDP, UniformShiftReferenceValue) {
  const auto env = env_uniform_shift(0.5, {}, 2);
  const GridDP dp = dp_solve(*env, 129, 65);
  EXPECT_NEAR(optimal_value(*env, dp, 0, std::vector<double>{0.0}), 0.999963493175297, 1e-12);
}

TEST(GridDP, ExactLinearValue) {
  const auto env = linear_env(2);
  const GridDP dp = dp_solve(*env, 65, 65);
  EXPECT_NEAR(optimal_value(*env, dp, 0, std::vector<double>{0.0}), 0.8, 1e-12);
}

TEST(GridDP, TransitionWeightsSumToOne) {
  const auto env = env_smooth_drift(1.5, 0.2, {}, 1);
  const Lattice states(1, 65);
  std::vector<double> w(states.size());
  for (double s : {-1.0, 0.0, 0.9}) {
    transition_weights(*env, states, 0, std::vector<double>{s, -0.3}, w);
    double total = 0.0;
    for (double x : w) {
      EXPECT_GE(x, 0.0);
      total += x;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(GridDP, GreedyPolicyAttainsOptimalValue) {
  for (int H : {1, 2, 3}) {
    const auto env = env_smooth_drift(1.0, 0.3, {}, H);
    const GridDP dp = dp_solve(*env, 33, 17);
    const std::vector<double> s1{-0.2};
    const double vstar = optimal_value(*env, dp, 0, s1);
    EXPECT_NEAR(policy_value(*env, dp, dp_greedy_policy(*env, dp), s1), vstar, 1e-12) << "H=" << H;
  }
}

// Property: no policy beats the optimal value, and the optimal value lies in [0, 1].
TEST(GridDPProperty, PoliciesAreDominated) {
  const auto env = env_uniform_shift(0.5, {}, 2);
  const GridDP dp = dp_solve(*env, 65, 33);
  Rng rng = make_stream({31, 0, 0, 0, StreamPurpose::Check});
  for (int t = 0; t < 50; ++t) {
    const double a0 = uniform(rng, -1.0, 1.0);
    const double slope = uniform(rng, -1.0, 1.0);
    const Policy p = [a0, slope](int, std::span<const double> s) {
      return std::vector<double>{std::clamp(a0 + slope * s[0], -1.0, 1.0)};
    };
    const std::vector<double> s1{uniform(rng, -1.0, 1.0)};
    const double vstar = optimal_value(*env, dp, 0, s1);
    ASSERT_LE(policy_value(*env, dp, p, s1), vstar + 1e-12);
    ASSERT_GE(vstar, 0.0);
    ASSERT_LE(vstar, 1.0);
  }
  EXPECT_LE(uniform_policy_value(*env, dp, std::vector<double>{0.0}), optimal_value(*env, dp, 0, std::vector<double>{0.0}));
}

TEST(GridDPProperty, MonotoneInReward) {
  const auto base = env_uniform_shift(0.5, {}, 2);
  const auto more = env_uniform_shift(0.5, {RewardSpec::Kind::Constant, -1.0}, 2);
  const GridDP a = dp_solve(*base, 33, 17);
  const GridDP b = dp_solve(*more, 33, 17);
  for (std::size_t i = 0; i < a.V[0].size(); ++i) EXPECT_LE(a.V[0][i], b.V[0][i] + 1e-12);
}

TEST(GridDPProperty, RefiningStateGridMovesValueLittle) {
  const auto env = env_smooth_drift(1.0, 0.3, {}, 2);
  const std::vector<double> s1{0.1};
  const double coarse = optimal_value(*env, dp_solve(*env, 65, 33), 0, s1);
  const double fine = optimal_value(*env, dp_solve(*env, 129, 33), 0, s1);
  EXPECT_LE(std::abs(coarse - fine), 0.01);
}

TEST(GridDP, Errors) {
  const auto env = env_uniform_shift(0.5, {}, 1);
  EXPECT_EQ(code_of([&] { dp_solve(*env, 1, 9); }), ErrorCode::ResolutionTooSmall);
  EXPECT_EQ(code_of([&] { dp_solve(*env, 9, 1); }), ErrorCode::ResolutionTooSmall);
}

TEST(OracleReport, Keys) {
  const auto env = env_uniform_shift(0.5, {}, 2);
  const GridDP dp = dp_solve(*env, 33, 17);
  const auto j = oracle_report(*env, dp, std::vector<double>{0.0});
  for (const char* key : {"env", "horizon", "s1", "v_star_s1", "v_uniform_s1", "state_grid", "action_grid"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["env"], "uniform_shift");
}

// --- minimax fit -------------------------------------------------------------

TEST(MinimaxFit, ConstantFeatureUsesMidrange) {
  Eigen::MatrixXd phi = Eigen::MatrixXd::Constant(4, 1, 2.0);
  Eigen::VectorXd y(4);
  y << 0.1, 0.9, 0.5, 0.3;
  Eigen::VectorXd t;
  EXPECT_NEAR(minimax_fit(phi, y, 10.0, 10, &t), 0.4, 1e-15);
  EXPECT_NEAR(t[0], 0.25, 1e-15);
  // The box binds.
  EXPECT_NEAR(minimax_fit(phi, y, 0.1, 10, &t), 0.7, 1e-15);
}

TEST(MinimaxFit, LineThroughThreePoints) {
  // Best uniform line through (0,0), (1,1), (2,0) is y = 1/2 with error 1/2.
  Eigen::MatrixXd phi(3, 2);
  phi << 1, 0, 1, 1, 1, 2;
  Eigen::VectorXd y(3);
  y << 0, 1, 0;
  EXPECT_NEAR(minimax_fit(phi, y, 10.0, 500), 0.5, 1e-3);
}

TEST(MinimaxFit, ExactFitHasZeroError) {
  Eigen::MatrixXd phi(5, 2);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) {
    phi(i, 0) = 1.0;
    phi(i, 1) = i - 2.0;
    y[i] = 0.3 - 0.2 * (i - 2.0);
  }
  EXPECT_LE(minimax_fit(phi, y, 1.0, 100), 1e-12);
}

// --- inherent Bellman error --------------------------------------------------

TEST(InherentError, ExactLinearIsZero) {
  const auto env = linear_env(2);
  const TaylorFeatureMap own(build_partition(2, 1.0), 1);
  const auto r = inherent_error_estimate(*env, own, ThetaBoxes{}, kSmallGrid);
  EXPECT_LE(r.estimate, 1e-6);
  EXPECT_EQ(r.per_step.size(), 2u);
  EXPECT_EQ(r.to_json()["kind"], "lower-estimate");
}

TEST(InherentError, ZeroMapBoundedByRewardPlusOne) {
  const auto env = env_uniform_shift(0.5, {}, 2);
  const ZeroFeatureMap zero(2);
  const auto r = inherent_error_estimate(*env, zero, ThetaBoxes{}, kSmallGrid);
  // With theta fixed at zero the image is r_h + E[max 0], clipped below 1.
  double max_reward = 0.0;
  const Lattice grid(2, kSmallGrid.eval_points);
  for (std::size_t i = 0; i < grid.size(); ++i) max_reward = std::max(max_reward, env->reward_mean(0, grid[i]));
  EXPECT_LE(r.estimate, 1.0 + 1e-12);
  EXPECT_GE(r.estimate, max_reward - 1e-12);
}

TEST(InherentError, ShrinksWithFinerPartition) {
  const auto env = env_uniform_shift(0.5, {}, 2);
  ThetaBoxes boxes;
  const double coarse =
    inherent_error_estimate(*env, TaylorFeatureMap(build_partition(2, 0.5), 0), boxes, kSmallGrid).estimate;
  const double fine =
    inherent_error_estimate(*env, TaylorFeatureMap(build_partition(2, 0.25), 0), boxes, kSmallGrid).estimate;
  EXPECT_LT(fine, coarse);
}

TEST(InherentError, NonIncreasingInDegreeOnSmoothEnv) {
  const auto env = env_smooth_drift(1.0, 0.3, {}, 2);
  ThetaBoxes boxes;
  boxes.grid_points = 2;
  boxes.max_candidates = 16;
  double previous = 1e9;
  for (int degree : {0, 1, 2}) {
    const double e =
      inherent_error_estimate(*env, TaylorFeatureMap(build_partition(2, 0.5), degree), boxes, kSmallGrid).estimate;
    EXPECT_LE(e, previous + 1e-9) << "degree=" << degree;
    previous = e;
  }
}

TEST(InherentError, Errors) {
  const auto env = env_uniform_shift(0.5, {}, 1);
  const TaylorFeatureMap wrong(build_partition(3, 1.0), 0);
  EXPECT_EQ(code_of([&] { inherent_error_estimate(*env, wrong, ThetaBoxes{}, kSmallGrid); }),
            ErrorCode::InvalidParameter);
  const TaylorFeatureMap ok(build_partition(2, 1.0), 0);
  EXPECT_EQ(code_of([&] { inherent_error_estimate(*env, ok, ThetaBoxes{}, InherentGrid{1, 33, 17, 10}); }),
            ErrorCode::ResolutionTooSmall);
}

// --- Taylor remainder --------------------------------------------------------

TEST(TaylorRemainder, QuadraticIsExactAtDegreeTwo) {
  const auto f = [](std::span<const double> x) { return 0.3 * x[0] * x[0] - x[0] + 0.2; };
  const DerivativeOracle df = [](std::span<const int> a, std::span<const double> at) {
    switch (a[0]) {
      case 0: return 0.3 * at[0] * at[0] - at[0] + 0.2;
      case 1: return 0.6 * at[0] - 1.0;
      case 2: return 0.6;
      default: return 0.0;
    }
  };
  const auto r = taylor_remainder_check(f, df, 1, 3.0, 1.0, 0.5, 33);
  EXPECT_LE(r.max_error, 1e-12);
  EXPECT_TRUE(r.within_bound);
  EXPECT_EQ(code_of([&] { taylor_remainder_check(f, df, 1, 3.0, 1.0, 0.5, 1); }), ErrorCode::ResolutionTooSmall);
}
