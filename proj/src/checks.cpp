#include "cinderella/checks.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>

#include <fmt/format.h>

#include "cinderella/config.hpp"
#include "cinderella/features.hpp"
#include "cinderella/geometry.hpp"
#include "cinderella/learner.hpp"
#include "cinderella/oracle.hpp"
#include "cinderella/regression.hpp"
#include "cinderella/rng.hpp"

namespace cinderella {

bool CheckReport::all_passed() const {
  for (const auto& e : entries) {
    if (!e.passed) return false;
  }
  return true;
}

nlohmann::json CheckReport::to_json() const {
  nlohmann::json j;
  j["level"] = level == CheckLevel::Quick ? "quick" : "full";
  j["passed"] = all_passed();
  j["checks"] = nlohmann::json::array();
  for (const auto& e : entries) {
    j["checks"].push_back({{"name", e.name}, {"passed", e.passed}, {"detail", e.detail}, {"seconds", e.seconds}});
  }
  return j;
}

namespace {

struct Verdict {
  bool passed = false;
  std::string detail;
};

Verdict check_partition(bool full, std::uint64_t seed) {
  Rng rng = make_stream({seed, 0, 0, 1, StreamPurpose::Check});
  const int points = full ? 10000 : 2000;
  for (int d = 1; d <= 3; ++d) {
    for (double eps : {1.0, 0.5, 0.25}) {
      const Partition p(d, eps);
      if (static_cast<double>(p.size()) > std::pow(2.0 / eps, d) + 1e-9) {
        return {false, fmt::format("d={} eps={}: N={} exceeds (2/eps)^d", d, eps, p.size())};
      }
      std::vector<double> z(static_cast<std::size_t>(d));
      std::vector<double> c(static_cast<std::size_t>(d));
      for (int t = 0; t < points; ++t) {
        for (double& x : z) x = uniform(rng, -1.0, 1.0);
        const RegionIndex n = p.assign(z);
        if (n.value >= p.size()) return {false, fmt::format("d={} eps={}: region out of range", d, eps)};
        p.center(n, c);
        for (int i = 0; i < d; ++i) {
          if (std::abs(z[i] - c[i]) > eps + 1e-12) {
            return {false, fmt::format("d={} eps={}: point farther than eps from its center", d, eps)};
          }
        }
      }
      for (std::size_t n = 0; n < p.size(); ++n) {
        if (!(p.assign(p.center(RegionIndex{n})) == RegionIndex{n})) {
          return {false, fmt::format("d={} eps={}: center {} not assigned to itself", d, eps, n)};
        }
      }
    }
  }
  return {true, fmt::format("{} points per (d, eps)", points)};
}

Verdict check_features(bool full, std::uint64_t seed) {
  for (int d = 1; d <= 4; ++d) {
    for (int k = 0; k <= 5; ++k) {
      const auto set = enumerate_multi_indices(d, k);
      const auto expected = binomial(static_cast<std::size_t>(k + d), static_cast<std::size_t>(k));
      if (set.size() != expected) {
        return {false, fmt::format("d={} degree={}: {} indices, expected {}", d, k, set.size(), expected)};
      }
    }
  }
  Rng rng = make_stream({seed, 0, 0, 2, StreamPurpose::Check});
  const TaylorFeatureMap map(Partition(2, 0.25), 2);
  const std::size_t N = map.num_regions();
  const std::size_t d = map.feature_dim();
  std::vector<double> stack(N * d);
  for (double& x : stack) x = uniform(rng, -1.0, 1.0);
  const int queries = full ? 10000 : 2000;
  double worst = 0.0;
  std::vector<double> z(2);
  for (int t = 0; t < queries; ++t) {
    for (double& x : z) x = uniform(rng, -1.0, 1.0);
    const auto phi = taylor_features(map, z);
    const std::size_t n = map.region(z).value;
    double local = 0.0;
    for (std::size_t j = 0; j < d; ++j) local += phi[j] * stack[n * d + j];
    const auto ext = extend_features(map, z);
    double global = 0.0;
    for (std::size_t j = 0; j < ext.size(); ++j) global += ext[j] * stack[j];
    worst = std::max(worst, std::abs(local - global));
  }
  if (worst > 1e-12) return {false, fmt::format("extended-map mismatch {:.3g}", worst)};
  return {true, fmt::format("dims match binomials; extension max diff {:.3g}", worst)};
}

Verdict check_regression(bool full, std::uint64_t seed) {
  Rng rng = make_stream({seed, 0, 0, 3, StreamPurpose::Check});
  const std::size_t d = full ? 16 : 8;
  const int updates = full ? 1000 : 300;
  RegionRidgeState state(d, 1.0);
  std::vector<double> phi(d);
  for (int t = 0; t < updates; ++t) {
    for (double& x : phi) x = uniform(rng, -1.0, 1.0);
    state.update(phi, uniform(rng, 0.0, 1.0));
  }
  const Eigen::MatrixXd direct = state.lam().inverse();
  const double inv_err = (state.lam_inv() - direct).cwiseAbs().maxCoeff();
  const Eigen::VectorXd solve = state.lam().ldlt().solve(state.bvec());
  const double theta_err = (state.theta_hat() - solve).cwiseAbs().maxCoeff();
  const bool ok = inv_err <= 1e-8 && theta_err <= 1e-8;
  return {ok, fmt::format("d={} updates={}: inverse err {:.3g}, theta err {:.3g}", d, updates, inv_err, theta_err)};
}

Verdict check_optimism(bool full, const CheckOptions& options) {
  const int seeds = full ? 50 : 10;
  const int episodes = full ? 20 : 10;
  const double rate = optimism_rate(seeds, episodes, options);
  return {rate >= 0.9, fmt::format("optimistic in {:.1f}% of {} pairs (need >= 90%)", 100.0 * rate, seeds * episodes)};
}

Verdict check_taylor(bool full) {
  const auto f = [](std::span<const double> x) { return std::sin(2.0 * x[0]); };
  const DerivativeOracle derivative = [](std::span<const int> alpha, std::span<const double> at) {
    const int k = alpha[0];
    return std::pow(2.0, k) * std::sin(2.0 * at[0] + k * std::numbers::pi / 2.0);
  };
  const int grid = full ? 4001 : 801;
  double previous = -1.0;
  std::string detail;
  bool ok = true;
  for (double eps : {0.5, 0.25, 0.125}) {
    const auto r = taylor_remainder_check(f, derivative, 1, 3.0, 8.0, eps, grid);
    detail += fmt::format("eps={} err={:.4g} bound={:.4g}; ", eps, r.max_error, r.bound);
    ok = ok && r.within_bound;
    if (previous > 0.0) ok = ok && previous >= 4.0 * r.max_error;
    previous = r.max_error;
  }
  return {ok, detail};
}

Verdict check_inherent(bool full, std::uint64_t seed) {
  InherentGrid grid;
  if (!full) grid = InherentGrid{17, 33, 17, 100};
  ThetaBoxes boxes;
  boxes.seed = seed;

  RunConfig linear;
  linear.env.name = "exact_linear";
  linear.horizon = 2;
  const auto env_linear = make_environment(linear);
  const TaylorFeatureMap own(Partition(2, 1.0), 1);
  const double exact = inherent_error_estimate(*env_linear, own, boxes, grid).estimate;

  RunConfig shift;
  shift.horizon = 2;
  const auto env_shift = make_environment(shift);
  const double coarse = inherent_error_estimate(*env_shift, TaylorFeatureMap(Partition(2, 0.5), 0), boxes, grid).estimate;
  const double fine = inherent_error_estimate(*env_shift, TaylorFeatureMap(Partition(2, 0.25), 0), boxes, grid).estimate;
  const bool ok = exact <= 1e-6 && fine < coarse;
  return {ok, fmt::format("exact linear {:.3g}; uniform shift eps=0.5 {:.4g}, eps=0.25 {:.4g}", exact, coarse, fine)};
}

} // namespace

double optimism_rate(int seeds, int episodes, const CheckOptions& options) {
  RunConfig c;
  c.env.name = "exact_linear";
  c.horizon = 1;
  const auto env = make_environment(c);
  const GridDP dp = dp_solve(*env, 65, 65);
  const std::vector<double> s1{0.0};
  const double vstar = optimal_value(*env, dp, 0, s1);
  auto features = std::make_shared<const TaylorFeatureMap>(Partition(2, 1.0), 0);

  LearnerOptions o;
  o.planner = PlannerKind::ExactGrid;
  o.bonus_scale = options.bonus_scale;
  o.param_radius = options.param_radius;
  o.delta = 0.1;
  o.episodes = episodes;
  long long hits = 0;
  for (int seed = 0; seed < seeds; ++seed) {
    CinderellaLearner learner(features, 1, 1, 1, o);
    for (int k = 1; k <= episodes; ++k) {
      learner.begin_episode(s1);
      if (learner.table().objective >= vstar - 1e-6) ++hits;
      const Episode ep = run_episode(
        *env, [&learner](int h, std::span<const double> s) { return learner.act(h, s); }, s1,
        {options.seed + static_cast<std::uint64_t>(seed), 0, static_cast<std::uint64_t>(k), 0,
         StreamPurpose::Environment});
      learner.end_episode(ep);
    }
  }
  return static_cast<double>(hits) / static_cast<double>(seeds * episodes);
}

CheckReport check_suite(CheckLevel level, const CheckOptions& options) {
  const bool full = level == CheckLevel::Full;
  CheckReport report;
  report.level = level;
  auto run = [&](const char* name, const std::function<Verdict()>& body) {
    const auto start = std::chrono::steady_clock::now();
    CheckEntry entry{name, false, "", 0.0};
    try {
      const Verdict v = body();
      entry.passed = v.passed;
      entry.detail = v.detail;
    } catch (const std::exception& e) {
      entry.detail = fmt::format("exception: {}", e.what());
    }
    entry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.entries.push_back(std::move(entry));
  };
  run("partition", [&] { return check_partition(full, options.seed); });
  run("features", [&] { return check_features(full, options.seed); });
  run("regression", [&] { return check_regression(full, options.seed); });
  run("optimism", [&] { return check_optimism(full, options); });
  run("taylor", [&] { return check_taylor(full); });
  run("inherent_error", [&] { return check_inherent(full, options.seed); });
  return report;
}

} // namespace cinderella
