#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "cinderella/features.hpp"
#include "cinderella/oracle.hpp"
#include "cinderella/rng.hpp"
#include "test_util.hpp"

using namespace cinderella;
using test_support::code_of;

namespace {

std::vector<std::vector<int>> as_vectors(const MultiIndexSet& set) {
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < set.size(); ++i) out.emplace_back(set[i].begin(), set[i].end());
  return out;
}

} // namespace

TEST(MultiIndex, TwoDimDegreeTwoOrder) {
  const auto set = enumerate_multi_indices(2, 2);
  const std::vector<std::vector<int>> expected{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  EXPECT_EQ(as_vectors(set), expected);
}

TEST(MultiIndex, DegreeZeroIsConstant) {
  const auto set = enumerate_multi_indices(3, 0);
  EXPECT_EQ(as_vectors(set), (std::vector<std::vector<int>>{{0, 0, 0}}));
}

TEST(MultiIndex, OneDimDegreeFour) {
  EXPECT_EQ(enumerate_multi_indices(1, 4).size(), 5u);
}

TEST(MultiIndex, ThreeDimDegreeTwoOrder) {
  const auto set = as_vectors(enumerate_multi_indices(3, 2));
  const std::vector<std::vector<int>> expected{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {2, 0, 0},
                                               {1, 1, 0}, {1, 0, 1}, {0, 2, 0}, {0, 1, 1}, {0, 0, 2}};
  EXPECT_EQ(set, expected);
}

// Property: size equals the binomial, entries are distinct, degrees never decrease.
TEST(MultiIndexProperty, CompleteGradedAndDuplicateFree) {
  for (int d = 1; d <= 4; ++d) {
    for (int k = 0; k <= 5; ++k) {
      const auto set = as_vectors(enumerate_multi_indices(d, k));
      EXPECT_EQ(set.size(), binomial(static_cast<std::size_t>(k + d), static_cast<std::size_t>(k)));
      const std::set<std::vector<int>> unique(set.begin(), set.end());
      EXPECT_EQ(unique.size(), set.size());
      int previous = 0;
      for (const auto& alpha : set) {
        int total = 0;
        for (int a : alpha) {
          EXPECT_GE(a, 0);
          total += a;
        }
        EXPECT_LE(total, k);
        EXPECT_GE(total, previous);
        previous = total;
      }
    }
  }
}

TEST(Binomial, SmallValuesAndOverflow) {
  EXPECT_EQ(binomial(4, 2), 6u);
  EXPECT_EQ(binomial(9, 5), 126u);
  EXPECT_EQ(binomial(5, 0), 1u);
  EXPECT_EQ(binomial(3, 5), 0u);
  EXPECT_EQ(code_of([] { binomial(200, 100); }), ErrorCode::InvalidParameter);
}

TEST(NuStar, CeilingOfNuMinusOne) {
  EXPECT_EQ(nu_star(1.0), 0);
  EXPECT_EQ(nu_star(2.5), 2);
  EXPECT_EQ(nu_star(3.0), 2);
  EXPECT_EQ(nu_star(0.5), 0);
  EXPECT_EQ(code_of([] { nu_star(0.0); }), ErrorCode::NonPositiveNu);
}

TEST(TaylorFeatures, CenterGivesFirstUnitVector) {
  const TaylorFeatureMap map(build_partition(2, 0.5), 2);
  const auto phi = taylor_features(map, std::vector<double>{0.5, -0.5});
  ASSERT_EQ(phi.size(), 6u);
  EXPECT_EQ(phi, (std::vector<double>{1, 0, 0, 0, 0, 0}));
}

TEST(TaylorFeatures, OneDimMonomials) {
  // Single cell centered at 0, so z - c = 0.5.
  const TaylorFeatureMap map(build_partition(1, 1.0), 2);
  const auto phi = taylor_features(map, std::vector<double>{0.5});
  EXPECT_EQ(phi, (std::vector<double>{1.0, 0.5, 0.25}));
}

TEST(TaylorFeatures, TwoDimLinear) {
  const TaylorFeatureMap map(build_partition(2, 1.0), 1);
  const auto phi = taylor_features(map, std::vector<double>{0.1, 0.2});
  ASSERT_EQ(phi.size(), 3u);
  EXPECT_DOUBLE_EQ(phi[0], 1.0);
  EXPECT_DOUBLE_EQ(phi[1], 0.1);
  EXPECT_DOUBLE_EQ(phi[2], 0.2);
}

TEST(TaylorFeatures, OffsetsAreFromRegionCenter) {
  const TaylorFeatureMap map(build_partition(2, 0.5), 2);
  // Region (0.5, 0.5); offsets (0.1, -0.2).
  const auto phi = taylor_features(map, std::vector<double>{0.6, 0.3});
  const std::vector<double> expected{1.0, 0.1, -0.2, 0.01, -0.02, 0.04};
  ASSERT_EQ(phi.size(), expected.size());
  for (std::size_t i = 0; i < phi.size(); ++i) EXPECT_NEAR(phi[i], expected[i], 1e-15);
}

TEST(TaylorFeatures, NormalizedDividesByBound) {
  const TaylorFeatureMap raw(build_partition(1, 1.0), 2);
  const TaylorFeatureMap scaled(build_partition(1, 1.0), 2, true);
  const double bound = 1.0 + 2.0 * std::sqrt(3.0);
  EXPECT_DOUBLE_EQ(raw.norm_bound(), bound);
  EXPECT_DOUBLE_EQ(scaled.norm_bound(), 1.0);
  const auto a = taylor_features(raw, std::vector<double>{0.7});
  const auto b = taylor_features(scaled, std::vector<double>{0.7});
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i], a[i] / bound, 1e-15);
}

TEST(TaylorFeatures, RejectsOutOfDomain) {
  const TaylorFeatureMap map(build_partition(1, 0.5), 1);
  EXPECT_EQ(code_of([&] { taylor_features(map, std::vector<double>{-1.5}); }), ErrorCode::OutOfDomain);
  EXPECT_EQ(code_of([&] { extend_features(map, std::vector<double>{2.0}); }), ErrorCode::OutOfDomain);
}

TEST(ExtendFeatures, SingleRegionMatchesLocal) {
  const TaylorFeatureMap map(build_partition(2, 1.0), 2);
  const std::vector<double> z{0.3, -0.8};
  EXPECT_EQ(extend_features(map, z), taylor_features(map, z));
}

TEST(ExtendFeatures, SecondBlockPlacement) {
  const TaylorFeatureMap map(build_partition(1, 0.5), 1);
  const auto ext = extend_features(map, std::vector<double>{0.75});
  EXPECT_EQ(ext, (std::vector<double>{0.0, 0.0, 1.0, 0.25}));
}

// Property: block dot product equals the region-wise evaluation.
TEST(ExtendFeaturesProperty, DotProductEquivalence) {
  Rng rng = make_stream({11, 0, 0, 0, StreamPurpose::Check});
  const TaylorFeatureMap map(build_partition(2, 0.25), 3);
  const std::size_t d = map.feature_dim();
  std::vector<double> stack(map.num_regions() * d);
  for (double& x : stack) x = uniform(rng, -2.0, 2.0);
  std::vector<double> z(2);
  for (int t = 0; t < 10000; ++t) {
    for (double& x : z) x = uniform(rng, -1.0, 1.0);
    const auto phi = taylor_features(map, z);
    const std::size_t n = map.region(z).value;
    double local = 0.0;
    for (std::size_t j = 0; j < d; ++j) local += phi[j] * stack[n * d + j];
    const auto ext = extend_features(map, z);
    double global = 0.0;
    for (std::size_t j = 0; j < ext.size(); ++j) global += ext[j] * stack[j];
    ASSERT_LE(std::abs(local - global), 1e-12);
  }
}

// Property: sampled feature norms respect 1 + 2 sqrt(d_feat), and 1 when normalized.
TEST(TaylorFeaturesProperty, NormBound) {
  Rng rng = make_stream({12, 0, 0, 0, StreamPurpose::Check});
  for (int dim = 1; dim <= 3; ++dim) {
    for (int degree = 0; degree <= 3; ++degree) {
      for (double eps : {1.0, 0.5}) {
        const TaylorFeatureMap raw(build_partition(dim, eps), degree);
        const TaylorFeatureMap scaled(build_partition(dim, eps), degree, true);
        std::vector<double> z(static_cast<std::size_t>(dim));
        for (int t = 0; t < 10000 / 24; ++t) {
          for (double& x : z) x = uniform(rng, -1.0, 1.0);
          double a = 0.0, b = 0.0;
          for (double v : taylor_features(raw, z)) a += v * v;
          for (double v : taylor_features(scaled, z)) b += v * v;
          ASSERT_LE(std::sqrt(a), raw.norm_bound() + 1e-12);
          ASSERT_LE(std::sqrt(b), 1.0 + 1e-12);
        }
      }
    }
  }
}

TEST(ZeroFeatureMap, AlwaysZero) {
  const ZeroFeatureMap map(2, 3);
  EXPECT_EQ(map.num_regions(), 1u);
  EXPECT_EQ(taylor_features(map, std::vector<double>{0.2, 0.9}), (std::vector<double>{0, 0, 0}));
}

TEST(TaylorCoefficients, ReproducesPolynomials) {
  // f(x, y) = 1 + 2x - y + 3xy + x^2 at any center is reproduced by degree 2.
  const auto f = [](std::span<const double> z) { return 1 + 2 * z[0] - z[1] + 3 * z[0] * z[1] + z[0] * z[0]; };
  const DerivativeOracle df = [](std::span<const int> a, std::span<const double> z) -> double {
    const double x = z[0], y = z[1];
    if (a[0] == 0 && a[1] == 0) return 1 + 2 * x - y + 3 * x * y + x * x;
    if (a[0] == 1 && a[1] == 0) return 2 + 3 * y + 2 * x;
    if (a[0] == 0 && a[1] == 1) return -1 + 3 * x;
    if (a[0] == 2 && a[1] == 0) return 2;
    if (a[0] == 1 && a[1] == 1) return 3;
    return 0;
  };
  const TaylorFeatureMap map(build_partition(2, 0.25), 2);
  Rng rng = make_stream({13, 0, 0, 0, StreamPurpose::Check});
  std::vector<double> z(2);
  for (int t = 0; t < 500; ++t) {
    for (double& x : z) x = uniform(rng, -1.0, 1.0);
    const auto phi = taylor_features(map, z);
    const auto theta = taylor_coefficients(map.index_set(), df, map.partition().center(map.region(z)));
    double fit = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j) fit += phi[j] * theta[j];
    ASSERT_NEAR(fit, f(z), 1e-12);
  }
}

namespace {

double sin2(std::span<const double> x) { return std::sin(2.0 * x[0]); }

double sin2_derivative(std::span<const int> alpha, std::span<const double> at) {
  return std::pow(2.0, alpha[0]) * std::sin(2.0 * at[0] + alpha[0] * std::numbers::pi / 2.0);
}

} // namespace

TEST(TaylorRemainder, PolynomialIsExact) {
  const auto f = [](std::span<const double> x) { return 0.3 - x[0] + 0.25 * x[0] * x[0]; };
  const DerivativeOracle df = [](std::span<const int> a, std::span<const double> x) -> double {
    if (a[0] == 0) return 0.3 - x[0] + 0.25 * x[0] * x[0];
    if (a[0] == 1) return -1 + 0.5 * x[0];
    if (a[0] == 2) return 0.5;
    return 0.0;
  };
  const auto r = taylor_remainder_check(f, df, 1, 3.0, 1.0, 0.25, 1001);
  EXPECT_LE(r.max_error, 1e-12);
}

// Reference errors from tests/oracles/reference_values.py (independent numpy fit).
TEST(TaylorRemainder, SineMatchesReferenceAndBound) {
  const double reference[] = {0.119566813464192, 0.019293934666509, 0.002555519899842};
  const double eps[] = {0.5, 0.25, 0.125};
  for (int i = 0; i < 3; ++i) {
    const auto r = taylor_remainder_check(sin2, sin2_derivative, 1, 3.0, 8.0, eps[i], 4001);
    EXPECT_NEAR(r.max_error, reference[i], 1e-12);
    EXPECT_TRUE(r.within_bound);
    EXPECT_DOUBLE_EQ(r.bound, 8.0 * eps[i] * eps[i] * eps[i]);
  }
}

TEST(TaylorRemainder, HalvingEpsilonCutsErrorFourfold) {
  const auto a = taylor_remainder_check(sin2, sin2_derivative, 1, 3.0, 8.0, 0.25, 4001);
  const auto b = taylor_remainder_check(sin2, sin2_derivative, 1, 3.0, 8.0, 0.125, 4001);
  EXPECT_GE(a.max_error, 4.0 * b.max_error);
}
