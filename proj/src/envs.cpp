#include "cinderella/envs.hpp"

#include <cmath>
#include <numbers>

#include "cinderella/error.hpp"

namespace cinderella {

namespace {

double constant_reward(const RewardSpec& spec, int horizon) {
  return spec.value < 0.0 ? 1.0 / horizon : spec.value;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

void check_sigma(double sigma) {
  if (!std::isfinite(sigma) || sigma < 0.0 || sigma > 1.0) {
    throw Error(ErrorCode::InvalidParameter, "reward noise sigma must lie in [0, 1]");
  }
}

void check_horizon(int horizon) {
  if (horizon < 1) throw Error(ErrorCode::InvalidParameter, "horizon must be >= 1");
}

} // namespace

double EnvironmentModel::step(int h, std::span<const double> s, std::span<const double> a, Rng& rng,
                              std::span<double> next_state) const {
  double z[16];
  const int ds = state_dim();
  const int da = action_dim();
  std::copy(s.begin(), s.end(), z);
  std::copy(a.begin(), a.end(), z + ds);
  const std::span<const double> zs(z, static_cast<std::size_t>(ds + da));
  const double reward = reward_mean(h, zs) + truncated_normal(rng, reward_noise_sigma());
  sample_next(h, zs, rng, next_state);
  return reward;
}

void EnvironmentModel::check_reward_normalization(ErrorCode code) const {
  constexpr int kPoints = 128;
  const int d = input_dim();
  if (d > 4) return;
  std::vector<int> idx(d, 0);
  std::vector<double> z(d);
  const int H = horizon();
  for (int h = 0; h < H; ++h) {
    std::fill(idx.begin(), idx.end(), 0);
    for (;;) {
      for (int i = 0; i < d; ++i) z[i] = -1.0 + 2.0 * idx[i] / (kPoints - 1);
      const double scaled = H * reward_mean(h, z);
      if (!(scaled >= -1e-12 && scaled <= 1.0 + 1e-12)) {
        throw Error(code, name() + ": H * reward_mean outside [0, 1] at step " + std::to_string(h + 1));
      }
      int axis = d - 1;
      while (axis >= 0 && ++idx[axis] == kPoints) idx[axis--] = 0;
      if (axis < 0) break;
    }
  }
}

// ---------------------------------------------------------------------------
// UniformShiftEnv

UniformShiftEnv::UniformShiftEnv(double beta, RewardSpec reward, int horizon, double reward_noise_sigma)
  : beta_(beta), reward_(reward), horizon_(horizon), sigma_(reward_noise_sigma) {
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorCode::BetaOutOfRange, "beta must lie in (0, 1)");
  check_horizon(horizon);
  check_sigma(reward_noise_sigma);
  check_reward_normalization(ErrorCode::InvalidReward);
}

void UniformShiftEnv::sample_next(int, std::span<const double> z, Rng& rng, std::span<double> out) const {
  const double lo = beta_ * z[0];
  out[0] = lo + (1.0 - beta_) * uniform(rng, 0.0, 1.0);
}

double UniformShiftEnv::transition_density(int, std::span<const double> z, std::span<const double> next) const {
  const double lo = beta_ * z[0];
  const double hi = lo + 1.0 - beta_;
  return (next[0] >= lo && next[0] <= hi) ? 1.0 / (1.0 - beta_) : 0.0;
}

double UniformShiftEnv::reward_mean(int, std::span<const double> z) const {
  switch (reward_.kind) {
  case RewardSpec::Kind::Zero: return 0.0;
  case RewardSpec::Kind::Constant: return constant_reward(reward_, horizon_);
  case RewardSpec::Kind::Default: break;
  }
  return (1.0 + std::sin(std::numbers::pi * (z[0] + z[1]) / 2.0)) / (2.0 * horizon_);
}

// ---------------------------------------------------------------------------
// SmoothDriftEnv

SmoothDriftEnv::SmoothDriftEnv(double drift_gain, double noise_sigma, RewardSpec reward, int horizon,
                               double reward_noise_sigma, double nu)
  : gain_(drift_gain), noise_sigma_(noise_sigma), reward_(reward), horizon_(horizon), sigma_(reward_noise_sigma),
    nu_(nu) {
  if (!std::isfinite(drift_gain)) throw Error(ErrorCode::InvalidParameter, "drift gain must be finite");
  if (!(noise_sigma > 0.0) || !std::isfinite(noise_sigma)) {
    throw Error(ErrorCode::InvalidParameter, "transition noise sigma must be positive");
  }
  if (!(nu > 0.0)) throw Error(ErrorCode::NonPositiveNu, "nu must be positive");
  check_horizon(horizon);
  check_sigma(reward_noise_sigma);
  check_reward_normalization(ErrorCode::InvalidReward);
}

double SmoothDriftEnv::drift_mean(std::span<const double> z) const {
  return (z[0] + gain_ * z[1]) / (1.0 + std::abs(gain_));
}

void SmoothDriftEnv::sample_next(int, std::span<const double> z, Rng& rng, std::span<double> out) const {
  const double mu = drift_mean(z);
  std::normal_distribution<double> normal(mu, noise_sigma_);
  for (;;) {
    const double x = normal(rng);
    if (x >= -1.0 && x <= 1.0) {
      out[0] = x;
      return;
    }
  }
}

double SmoothDriftEnv::transition_density(int, std::span<const double> z, std::span<const double> next) const {
  const double x = next[0];
  if (x < -1.0 || x > 1.0) return 0.0;
  const double mu = drift_mean(z);
  const double mass = normal_cdf((1.0 - mu) / noise_sigma_) - normal_cdf((-1.0 - mu) / noise_sigma_);
  const double u = (x - mu) / noise_sigma_;
  return std::exp(-0.5 * u * u) / (noise_sigma_ * std::sqrt(2.0 * std::numbers::pi) * mass);
}

double SmoothDriftEnv::reward_mean(int, std::span<const double> z) const {
  switch (reward_.kind) {
  case RewardSpec::Kind::Zero: return 0.0;
  case RewardSpec::Kind::Constant: return constant_reward(reward_, horizon_);
  case RewardSpec::Kind::Default: break;
  }
  const double ds = z[0] - 0.5;
  const double da = z[1] - 0.5 * z[0];
  return std::exp(-2.0 * ds * ds - da * da) / horizon_;
}

// ---------------------------------------------------------------------------
// ExactLinearEnv

ExactLinearEnv::ExactLinearEnv(std::vector<Eigen::VectorXd> theta_per_step, TaylorFeatureMap features,
                               int state_dim, int action_dim, double reward_noise_sigma)
  : theta_(std::move(theta_per_step)), features_(std::move(features)), state_dim_(state_dim),
    action_dim_(action_dim), sigma_(reward_noise_sigma) {
  if (theta_.empty()) throw Error(ErrorCode::InvalidTheta, "need one parameter vector per step");
  if (state_dim < 1 || action_dim < 1) throw Error(ErrorCode::DimensionZero, "state and action dims must be >= 1");
  if (features_.input_dim() != state_dim + action_dim) {
    throw Error(ErrorCode::InvalidParameter, "feature map input dimension must equal d_S + d_A");
  }
  if (features_.num_regions() != 1) throw Error(ErrorCode::InvalidParameter, "feature map must have a single region");
  for (const auto& theta : theta_) {
    if (static_cast<std::size_t>(theta.size()) != features_.feature_dim() || !theta.allFinite()) {
      throw Error(ErrorCode::InvalidTheta, "parameter vector has the wrong length or non-finite entries");
    }
  }
  check_sigma(reward_noise_sigma);
  check_reward_normalization(ErrorCode::InvalidTheta);
}

void ExactLinearEnv::sample_next(int, std::span<const double>, Rng& rng, std::span<double> out) const {
  for (int i = 0; i < state_dim_; ++i) out[i] = uniform(rng, -1.0, 1.0);
}

double ExactLinearEnv::transition_density(int, std::span<const double>, std::span<const double> next) const {
  for (int i = 0; i < state_dim_; ++i) {
    if (next[i] < -1.0 || next[i] > 1.0) return 0.0;
  }
  return std::pow(0.5, state_dim_);
}

double ExactLinearEnv::reward_mean(int h, std::span<const double> z) const {
  double phi[64];
  const auto d = features_.feature_dim();
  std::vector<double> heap;
  std::span<double> out(phi, d);
  if (d > 64) {
    heap.resize(d);
    out = heap;
  }
  features_.evaluate(z, out);
  double value = 0.0;
  for (std::size_t j = 0; j < d; ++j) value += out[j] * theta_[h][static_cast<Eigen::Index>(j)];
  return value;
}

// ---------------------------------------------------------------------------

std::unique_ptr<UniformShiftEnv> env_uniform_shift(double beta, RewardSpec reward, int horizon,
                                                   double reward_noise_sigma) {
  return std::make_unique<UniformShiftEnv>(beta, reward, horizon, reward_noise_sigma);
}

std::unique_ptr<SmoothDriftEnv> env_smooth_drift(double drift_gain, double noise_sigma, RewardSpec reward,
                                                 int horizon, double reward_noise_sigma) {
  return std::make_unique<SmoothDriftEnv>(drift_gain, noise_sigma, reward, horizon, reward_noise_sigma);
}

std::unique_ptr<ExactLinearEnv> env_exact_linear(std::vector<Eigen::VectorXd> theta_per_step,
                                                 TaylorFeatureMap features, int state_dim, int action_dim,
                                                 double reward_noise_sigma) {
  return std::make_unique<ExactLinearEnv>(std::move(theta_per_step), std::move(features), state_dim, action_dim,
                                          reward_noise_sigma);
}

Episode run_episode(const Simulator& env, const Policy& policy, std::span<const double> s1, const StreamKey& key) {
  const int ds = env.state_dim();
  const int da = env.action_dim();
  if (static_cast<int>(s1.size()) != ds) throw Error(ErrorCode::OutOfDomain, "initial state has the wrong dimension");
  Episode episode;
  std::vector<double> state(s1.begin(), s1.end());
  for (int h = 0; h < env.horizon(); ++h) {
    std::vector<double> action = policy(h, state);
    if (static_cast<int>(action.size()) != da) {
      throw Error(ErrorCode::PolicyOutOfRange, "policy returned an action of the wrong dimension");
    }
    for (double a : action) {
      if (!(a >= -1.0 && a <= 1.0)) throw Error(ErrorCode::PolicyOutOfRange, "policy action outside [-1, 1]");
    }
    StreamKey step_key = key;
    step_key.step = static_cast<std::uint64_t>(h + 1);
    step_key.purpose = StreamPurpose::Environment;
    Rng rng = make_stream(step_key);
    std::vector<double> next(ds);
    const double reward = env.step(h, state, action, rng, next);
    episode.total_return += reward;
    episode.transitions.push_back(Transition{h + 1, state, std::move(action), reward, next});
    state = std::move(next);
  }
  return episode;
}

} // namespace cinderella
