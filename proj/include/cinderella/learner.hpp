#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cinderella/envs.hpp"
#include "cinderella/features.hpp"
#include "cinderella/geometry.hpp"
#include "cinderella/regression.hpp"

namespace cinderella {

enum class PlannerKind { Relaxation, ExactGrid };

const char* to_string(PlannerKind kind);

/// Constants of the confidence radii.
struct BonusSchedule {
  double delta = 0.1;
  double lambda = 1.0;
  double L_phi = 1.0;           // feature-norm bound
  double R_max = 1.0;           // parameter-set diameter bound
  std::size_t N = 1;            // regions per step
  std::size_t d_feat = 1;       // features per region
  long long K = 1;              // planned episodes
  int H = 1;
  double inherent_bound = 0.0;  // user-supplied bound on the inherent Bellman error
  double bonus_scale = 1.0;     // multiplier on the concentration radius

  void validate() const;
};

/// Concentration radius sqrt(beta) at episode k (k >= 1):
///
///   c * ( sqrt( d ln(1 + k L^2 / lambda) + N d max(0, ln(3 R sqrt(k)))
///               + ln(H N K / delta) ) + 2 ).
///
/// The middle term is the log covering number of the value class at scale
/// 1/sqrt(k). The visit count p does not enter.
double beta_radius(const BonusSchedule& sch, long long k, std::size_t p);

/// Feasibility radius sqrt(alpha) = sqrt(beta) + sqrt(p) * inherent_bound + R_max / lambda.
double alpha_radius(const BonusSchedule& sch, long long k, std::size_t p);

struct LearnerOptions {
  double lambda = 1.0;
  double delta = 0.1;
  double bonus_scale = 0.1;
  double inherent_bound = 0.0;
  double param_radius = 1.0;
  int action_grid = 21;  // points per action axis
  PlannerKind planner = PlannerKind::Relaxation;
  int exact_grid_resolution = 3;
  double target_clip_lo = -1.0;
  double target_clip_hi = 2.0;
  long long episodes = 1;  // K, enters the union bound
};

/// Per (step, region) parameters of one planning round.
struct ThetaBlock {
  Eigen::VectorXd theta_hat;
  Eigen::VectorXd theta_bar;
  double xi_norm = 0.0;     // ||theta_bar - theta_hat||_Lambda
  double sqrt_alpha = 0.0;
};

struct ThetaTable {
  int horizon = 0;
  std::size_t regions = 0;
  std::vector<ThetaBlock> blocks;  // row-major in (h, n), h 0-based
  double objective = 0.0;          // max_a phi(s1, a)' theta_bar at step 1, unclipped

  ThetaBlock& at(int h, std::size_t n) { return blocks[static_cast<std::size_t>(h) * regions + n]; }
  const ThetaBlock& at(int h, std::size_t n) const { return blocks[static_cast<std::size_t>(h) * regions + n]; }
};

struct PlanningSummary {
  PlannerKind planner = PlannerKind::Relaxation;
  long long episode = 0;
  double alpha_min = 0.0;
  double alpha_mean = 0.0;
  double alpha_max = 0.0;
  std::size_t visited_regions = 0;
  double value_s1 = 0.0;  // optimistic V at the initial state
};

/// Anything the harness can run episodes with.
class Agent {
public:
  virtual ~Agent() = default;
  /// Prepares the policy for the coming episode.
  virtual PlanningSummary begin_episode(std::span<const double> s1) = 0;
  /// Action at 0-based step h. Deterministic between begin_episode and end_episode.
  virtual std::vector<double> act(int h, std::span<const double> state) const = 0;
  virtual void end_episode(const Episode& episode) = 0;
};

/// Optimistic learner with one ridge regression per (step, region).
///
/// The relaxation planner adds a pointwise bonus sqrt(alpha) ||phi||_{Lambda^-1}
/// to the ridge estimate; the exact-grid planner searches the constrained
/// program directly on tiny instances. Steps are 0-based in this API.
class CinderellaLearner final : public Agent {
public:
  CinderellaLearner(std::shared_ptr<const LocalFeatureMap> features, int state_dim, int action_dim, int horizon,
                    LearnerOptions options);

  PlanningSummary begin_episode(std::span<const double> s1) override;
  std::vector<double> act(int h, std::span<const double> state) const override;
  void end_episode(const Episode& episode) override;

  /// Clipped optimistic Q at 0-based step h for z = (s, a).
  double optimistic_q(int h, std::span<const double> z) const;
  /// Unclipped score; the quantity the clip is applied to.
  double raw_score(int h, std::span<const double> z) const;
  /// max over the action grid of optimistic_q; zero past the horizon.
  double optimistic_value(int h, std::span<const double> state) const;
  /// Smallest action-grid index attaining the max of optimistic_q.
  std::size_t greedy_action_index(int h, std::span<const double> state) const;

  /// Plans, rolls out one episode, and absorbs it.
  struct EpisodeResult {
    Episode episode;
    PlanningSummary summary;
  };
  EpisodeResult plan_and_act_episode(const Simulator& env, std::span<const double> s1, const StreamKey& key);

  /// Exhaustive search of the constrained program over a g-point grid per
  /// coordinate of every xi block. Requires H * N * d <= 6 and 1 <= g <= 5.
  ThetaTable solve_exact_grid(std::span<const double> s1, int g) const;

  const RegionRidgeState& ridge(int h, std::size_t n) const { return ridges_[index(h, n)]; }
  const ThetaTable& table() const noexcept { return table_; }
  const BonusSchedule& schedule() const noexcept { return schedule_; }
  BonusSchedule& schedule() noexcept { return schedule_; }
  const LearnerOptions& options() const noexcept { return options_; }
  const Lattice& action_grid() const noexcept { return actions_; }
  const LocalFeatureMap& features() const noexcept { return *features_; }
  long long episodes_completed() const noexcept { return completed_; }
  int horizon() const noexcept { return horizon_; }
  std::size_t regions() const noexcept { return features_->num_regions(); }

  /// Regression targets stored for (h, n): features, rewards and next states.
  struct SampleStore {
    std::vector<double> phi;
    std::vector<double> reward;
    std::vector<double> next_state;
    std::size_t size() const noexcept { return reward.size(); }
  };
  const SampleStore& samples(int h, std::size_t n) const { return samples_[index(h, n)]; }

private:
  std::size_t index(int h, std::size_t n) const { return static_cast<std::size_t>(h) * regions() + n; }
  double clip_target(double t) const;
  void plan_relaxation(long long k);
  void plan_exact(std::span<const double> s1, long long k);

  std::shared_ptr<const LocalFeatureMap> features_;
  int state_dim_;
  int action_dim_;
  int horizon_;
  LearnerOptions options_;
  BonusSchedule schedule_;
  Lattice actions_;
  std::vector<RegionRidgeState> ridges_;
  std::vector<SampleStore> samples_;
  ThetaTable table_;
  bool use_bonus_ = true;  // false once theta_bar carries the optimism
  long long completed_ = 0;
};

/// Argmax with ties broken to the smallest index.
std::size_t argmax_first(std::span<const double> values);

} // namespace cinderella
