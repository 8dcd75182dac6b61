#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cinderella/features.hpp"
#include "cinderella/error.hpp"
#include "cinderella/rng.hpp"

namespace cinderella {

enum class SmoothnessKind { Mildly, Strongly, Linear };

struct SmoothnessTag {
  SmoothnessKind kind = SmoothnessKind::Mildly;
  double nu = 1.0;
};

/// One step of an episode. `h` is 1-based, matching the step numbering in logs.
struct Transition {
  int h = 1;
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
};

struct Episode {
  std::vector<Transition> transitions;
  double total_return = 0.0;
};

/// What a learner may touch: dimensions and sampling, nothing else.
class Simulator {
public:
  virtual ~Simulator() = default;

  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int horizon() const = 0;

  /// Draws a noisy reward and the next state for step h (0-based) from (s, a).
  virtual double step(int h, std::span<const double> s, std::span<const double> a, Rng& rng,
                      std::span<double> next_state) const = 0;
};

/// Full model: the learner surface plus the quantities oracles need.
///
/// States and actions live in [-1,1]^d_S and [-1,1]^d_A. A state-action
/// pair z is the concatenation (s, a). Steps are 0-based in this interface.
class EnvironmentModel : public Simulator {
public:
  virtual std::string name() const = 0;
  virtual void sample_next(int h, std::span<const double> z, Rng& rng, std::span<double> out) const = 0;
  virtual double transition_density(int h, std::span<const double> z, std::span<const double> next) const = 0;
  virtual double reward_mean(int h, std::span<const double> z) const = 0;
  virtual double reward_noise_sigma() const = 0;
  virtual SmoothnessTag smoothness() const = 0;
  /// Whether the transition density depends on the action.
  virtual bool action_affects_transition() const { return true; }

  double step(int h, std::span<const double> s, std::span<const double> a, Rng& rng,
              std::span<double> next_state) const final;

  int input_dim() const { return state_dim() + action_dim(); }

protected:
  /// Throws unless 0 <= H * reward_mean <= 1 on a 128-per-axis grid of every step.
  void check_reward_normalization(ErrorCode code) const;
};

/// Mean-reward choice shared by the benchmark environments.
struct RewardSpec {
  enum class Kind { Default, Zero, Constant };
  Kind kind = Kind::Default;
  /// Per-step mean reward for Kind::Constant; negative selects 1/H.
  double value = -1.0;
};

/// s' ~ Unif[beta s, beta s + 1 - beta] for d_S = d_A = 1. The density is
/// discontinuous, yet the Bellman operator maps bounded functions to
/// Lipschitz ones, so the instance is mildly smooth with nu = 1 only.
/// Default reward: (1/H) (1 + sin(pi (s + a) / 2)) / 2.
class UniformShiftEnv final : public EnvironmentModel {
public:
  UniformShiftEnv(double beta, RewardSpec reward, int horizon, double reward_noise_sigma);

  std::string name() const override { return "uniform_shift"; }
  int state_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  int horizon() const override { return horizon_; }
  void sample_next(int h, std::span<const double> z, Rng& rng, std::span<double> out) const override;
  double transition_density(int h, std::span<const double> z, std::span<const double> next) const override;
  double reward_mean(int h, std::span<const double> z) const override;
  double reward_noise_sigma() const override { return sigma_; }
  SmoothnessTag smoothness() const override { return {SmoothnessKind::Mildly, 1.0}; }
  bool action_affects_transition() const override { return false; }

  double beta() const noexcept { return beta_; }

private:
  double beta_;
  RewardSpec reward_;
  int horizon_;
  double sigma_;
};

/// s' ~ N(mu, sigma^2) truncated to [-1,1], mu = (s + gain a) / (1 + |gain|).
/// Density and reward are infinitely differentiable in (s, a).
/// Default reward: (1/H) exp(-2 (s - 1/2)^2 - (a - s/2)^2).
class SmoothDriftEnv final : public EnvironmentModel {
public:
  SmoothDriftEnv(double drift_gain, double noise_sigma, RewardSpec reward, int horizon,
                 double reward_noise_sigma, double nu = 3.0);

  std::string name() const override { return "smooth_drift"; }
  int state_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  int horizon() const override { return horizon_; }
  void sample_next(int h, std::span<const double> z, Rng& rng, std::span<double> out) const override;
  double transition_density(int h, std::span<const double> z, std::span<const double> next) const override;
  double reward_mean(int h, std::span<const double> z) const override;
  double reward_noise_sigma() const override { return sigma_; }
  SmoothnessTag smoothness() const override { return {SmoothnessKind::Strongly, nu_}; }

  double drift_mean(std::span<const double> z) const;

private:
  double gain_;
  double noise_sigma_;
  RewardSpec reward_;
  int horizon_;
  double sigma_;
  double nu_;
};

/// Reward mean phi(z)' theta_h on a single-region feature map and next state
/// uniform on [-1,1]^d_S regardless of (s, a). Every Bellman image is then
/// phi' theta_h plus a constant, exactly linear whenever phi contains the
/// constant feature, so the inherent Bellman error is zero.
class ExactLinearEnv final : public EnvironmentModel {
public:
  ExactLinearEnv(std::vector<Eigen::VectorXd> theta_per_step, TaylorFeatureMap features, int state_dim,
                 int action_dim, double reward_noise_sigma);

  std::string name() const override { return "exact_linear"; }
  int state_dim() const override { return state_dim_; }
  int action_dim() const override { return action_dim_; }
  int horizon() const override { return static_cast<int>(theta_.size()); }
  void sample_next(int h, std::span<const double> z, Rng& rng, std::span<double> out) const override;
  double transition_density(int h, std::span<const double> z, std::span<const double> next) const override;
  double reward_mean(int h, std::span<const double> z) const override;
  double reward_noise_sigma() const override { return sigma_; }
  SmoothnessTag smoothness() const override { return {SmoothnessKind::Linear, 1.0}; }
  bool action_affects_transition() const override { return false; }

  const TaylorFeatureMap& features() const noexcept { return features_; }
  const Eigen::VectorXd& theta(int h) const { return theta_.at(h); }

private:
  std::vector<Eigen::VectorXd> theta_;
  TaylorFeatureMap features_;
  int state_dim_;
  int action_dim_;
  double sigma_;
};

std::unique_ptr<UniformShiftEnv> env_uniform_shift(double beta, RewardSpec reward, int horizon,
                                                   double reward_noise_sigma = 0.1);
std::unique_ptr<SmoothDriftEnv> env_smooth_drift(double drift_gain, double noise_sigma, RewardSpec reward,
                                                 int horizon, double reward_noise_sigma = 0.1);
std::unique_ptr<ExactLinearEnv> env_exact_linear(std::vector<Eigen::VectorXd> theta_per_step,
                                                 TaylorFeatureMap features, int state_dim, int action_dim,
                                                 double reward_noise_sigma = 0.1);

/// Maps (0-based step, state) to an action in [-1,1]^d_A.
using Policy = std::function<std::vector<double>(int h, std::span<const double> state)>;

/// Rolls out one episode from s1. Step h draws from the stream
/// (key.seed, key.run, key.episode, h, Environment).
Episode run_episode(const Simulator& env, const Policy& policy, std::span<const double> s1, const StreamKey& key);

} // namespace cinderella
