#include "cinderella/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cinderella/error.hpp"
#include "scratch.hpp"

namespace cinderella {

const char* to_string(PlannerKind kind) {
  return kind == PlannerKind::Relaxation ? "relaxation" : "exact-grid";
}

void BonusSchedule::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidParameter, "delta must lie in (0, 1)");
  if (!(lambda > 0.0)) throw Error(ErrorCode::NonPositiveLambda, "lambda must be positive");
  if (!(L_phi >= 0.0) || !(R_max >= 0.0)) throw Error(ErrorCode::InvalidParameter, "L_phi and R_max must be >= 0");
  if (N < 1 || d_feat < 1 || K < 1 || H < 1) throw Error(ErrorCode::InvalidParameter, "N, d, K, H must be >= 1");
  if (!(inherent_bound >= 0.0)) throw Error(ErrorCode::InvalidParameter, "inherent_bound must be >= 0");
  if (!std::isfinite(bonus_scale)) throw Error(ErrorCode::InvalidParameter, "bonus_scale must be finite");
}

double beta_radius(const BonusSchedule& sch, long long k, std::size_t) {
  const double kk = static_cast<double>(std::max(k, 1LL));
  const double d = static_cast<double>(sch.d_feat);
  const double N = static_cast<double>(sch.N);
  const double design = d * std::log1p(kk * sch.L_phi * sch.L_phi / sch.lambda);
  const double covering = std::max(0.0, N * d * std::log(3.0 * sch.R_max * std::max(std::sqrt(kk), 1.0)));
  const double union_bound = std::log(static_cast<double>(sch.H) * N * static_cast<double>(sch.K) / sch.delta);
  const double radicand = std::max(0.0, design + covering + union_bound);
  return sch.bonus_scale * (std::sqrt(radicand) + 2.0);
}

double alpha_radius(const BonusSchedule& sch, long long k, std::size_t p) {
  return beta_radius(sch, k, p) + std::sqrt(static_cast<double>(p)) * sch.inherent_bound + sch.R_max / sch.lambda;
}

std::size_t argmax_first(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

CinderellaLearner::CinderellaLearner(std::shared_ptr<const LocalFeatureMap> features, int state_dim, int action_dim,
                                     int horizon, LearnerOptions options)
  : features_(std::move(features)), state_dim_(state_dim), action_dim_(action_dim), horizon_(horizon),
    options_(options), actions_(std::max(action_dim, 1), std::max(options.action_grid, 1)) {
  if (!features_) throw Error(ErrorCode::InvalidParameter, "feature map is required");
  if (horizon < 1) throw Error(ErrorCode::InvalidParameter, "horizon must be >= 1");
  if (state_dim < 1 || action_dim < 1) throw Error(ErrorCode::DimensionZero, "state and action dims must be >= 1");
  if (features_->input_dim() != state_dim + action_dim) {
    throw Error(ErrorCode::InvalidParameter, "feature map input dimension must equal d_S + d_A");
  }
  if (options.action_grid < 1) throw Error(ErrorCode::InvalidParameter, "action grid needs >= 1 point");
  if (!(options.target_clip_lo < options.target_clip_hi)) {
    throw Error(ErrorCode::InvalidParameter, "target clip bounds must satisfy lo < hi");
  }

  schedule_.delta = options.delta;
  schedule_.lambda = options.lambda;
  schedule_.L_phi = features_->norm_bound();
  schedule_.R_max = options.param_radius;
  schedule_.N = features_->num_regions();
  schedule_.d_feat = features_->feature_dim();
  schedule_.K = options.episodes;
  schedule_.H = horizon;
  schedule_.inherent_bound = options.inherent_bound;
  schedule_.bonus_scale = options.bonus_scale;
  schedule_.validate();

  const std::size_t blocks = static_cast<std::size_t>(horizon) * regions();
  const auto d = static_cast<Eigen::Index>(features_->feature_dim());
  ridges_.reserve(blocks);
  for (std::size_t b = 0; b < blocks; ++b) ridges_.emplace_back(features_->feature_dim(), options.lambda);
  samples_.resize(blocks);

  table_.horizon = horizon;
  table_.regions = regions();
  table_.blocks.resize(blocks);
  const double sqrt_alpha = alpha_radius(schedule_, 1, 0);
  for (auto& block : table_.blocks) {
    block.theta_hat = Eigen::VectorXd::Zero(d);
    block.theta_bar = Eigen::VectorXd::Zero(d);
    block.sqrt_alpha = sqrt_alpha;
  }
}

double CinderellaLearner::raw_score(int h, std::span<const double> z) const {
  const std::size_t d = features_->feature_dim();
  detail::Scratch phi(d);
  features_->evaluate(z, phi.span());
  const std::size_t n = features_->region(z).value;
  const ThetaBlock& block = table_.at(h, n);
  const Eigen::VectorXd& theta = use_bonus_ ? block.theta_hat : block.theta_bar;
  double value = 0.0;
  for (std::size_t j = 0; j < d; ++j) value += phi[j] * theta[static_cast<Eigen::Index>(j)];
  if (use_bonus_ && block.sqrt_alpha != 0.0) value += block.sqrt_alpha * ridges_[index(h, n)].inv_norm(phi.span());
  return value;
}

double CinderellaLearner::optimistic_q(int h, std::span<const double> z) const {
  return std::clamp(raw_score(h, z), 0.0, 1.0);
}

std::size_t CinderellaLearner::greedy_action_index(int h, std::span<const double> state) const {
  const std::size_t dz = static_cast<std::size_t>(state_dim_ + action_dim_);
  detail::Scratch z(dz);
  std::copy(state.begin(), state.end(), z.data());
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    const auto a = actions_[i];
    std::copy(a.begin(), a.end(), z.data() + state_dim_);
    const double q = optimistic_q(h, std::span<const double>(z.data(), dz));
    if (q > best_value) {
      best_value = q;
      best = i;
    }
  }
  return best;
}

double CinderellaLearner::optimistic_value(int h, std::span<const double> state) const {
  if (h >= horizon_) return 0.0;
  const std::size_t dz = static_cast<std::size_t>(state_dim_ + action_dim_);
  detail::Scratch z(dz);
  std::copy(state.begin(), state.end(), z.data());
  double best = 0.0;
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    const auto a = actions_[i];
    std::copy(a.begin(), a.end(), z.data() + state_dim_);
    best = std::max(best, optimistic_q(h, std::span<const double>(z.data(), dz)));
    if (best >= 1.0) break;
  }
  return best;
}

std::vector<double> CinderellaLearner::act(int h, std::span<const double> state) const {
  const auto a = actions_[greedy_action_index(h, state)];
  return {a.begin(), a.end()};
}

double CinderellaLearner::clip_target(double t) const {
  return std::clamp(t, options_.target_clip_lo, options_.target_clip_hi);
}

void CinderellaLearner::plan_relaxation(long long k) {
  const std::size_t d = features_->feature_dim();
  use_bonus_ = true;
  for (int h = horizon_ - 1; h >= 0; --h) {
    for (std::size_t n = 0; n < regions(); ++n) {
      RegionRidgeState& ridge = ridges_[index(h, n)];
      const SampleStore& store = samples_[index(h, n)];
      ThetaBlock& block = table_.at(h, n);
      block.sqrt_alpha = alpha_radius(schedule_, k, ridge.count());
      ridge.clear_targets();
      for (std::size_t t = 0; t < store.size(); ++t) {
        const std::span<const double> phi(store.phi.data() + t * d, d);
        const std::span<const double> next(store.next_state.data() + t * state_dim_,
                                           static_cast<std::size_t>(state_dim_));
        ridge.accumulate_target(phi, clip_target(store.reward[t] + optimistic_value(h + 1, next)));
      }
      block.theta_hat = ridge.theta_hat();
      block.theta_bar = block.theta_hat;
      block.xi_norm = 0.0;
    }
  }
}

void CinderellaLearner::plan_exact(std::span<const double> s1, long long) {
  table_ = solve_exact_grid(s1, options_.exact_grid_resolution);
  use_bonus_ = false;
}

PlanningSummary CinderellaLearner::begin_episode(std::span<const double> s1) {
  if (static_cast<int>(s1.size()) != state_dim_) throw Error(ErrorCode::OutOfDomain, "initial state dimension");
  for (double x : s1) {
    if (!(x >= -1.0 && x <= 1.0)) throw Error(ErrorCode::OutOfDomain, "initial state outside [-1, 1]");
  }
  const long long k = completed_ + 1;
  if (options_.planner == PlannerKind::Relaxation) {
    plan_relaxation(k);
  } else {
    plan_exact(s1, k);
  }

  PlanningSummary summary;
  summary.planner = options_.planner;
  summary.episode = k;
  summary.alpha_min = std::numeric_limits<double>::infinity();
  summary.alpha_max = -std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (std::size_t b = 0; b < table_.blocks.size(); ++b) {
    const double a = table_.blocks[b].sqrt_alpha;
    summary.alpha_min = std::min(summary.alpha_min, a);
    summary.alpha_max = std::max(summary.alpha_max, a);
    total += a;
    if (ridges_[b].count() > 0) ++summary.visited_regions;
  }
  summary.alpha_mean = total / static_cast<double>(table_.blocks.size());
  summary.value_s1 = optimistic_value(0, s1);

  if (options_.planner == PlannerKind::Relaxation) {
    const std::size_t dz = static_cast<std::size_t>(state_dim_ + action_dim_);
    detail::Scratch z(dz);
    std::copy(s1.begin(), s1.end(), z.data());
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < actions_.size(); ++i) {
      const auto a = actions_[i];
      std::copy(a.begin(), a.end(), z.data() + state_dim_);
      best = std::max(best, raw_score(0, std::span<const double>(z.data(), dz)));
    }
    table_.objective = best;
  }
  return summary;
}

void CinderellaLearner::end_episode(const Episode& episode) {
  const std::size_t d = features_->feature_dim();
  const std::size_t dz = static_cast<std::size_t>(state_dim_ + action_dim_);
  std::vector<double> z(dz);
  std::vector<double> phi(d);
  for (const Transition& t : episode.transitions) {
    const int h = t.h - 1;
    if (h < 0 || h >= horizon_) throw Error(ErrorCode::InvalidParameter, "transition step outside [1, H]");
    std::copy(t.state.begin(), t.state.end(), z.begin());
    std::copy(t.action.begin(), t.action.end(), z.begin() + state_dim_);
    const std::size_t n = features_->partition().assign(z).value;
    features_->evaluate(z, phi);
    ridges_[index(h, n)].update_design(phi);
    SampleStore& store = samples_[index(h, n)];
    store.phi.insert(store.phi.end(), phi.begin(), phi.end());
    store.reward.push_back(t.reward);
    store.next_state.insert(store.next_state.end(), t.next_state.begin(), t.next_state.end());
  }
  ++completed_;
}

CinderellaLearner::EpisodeResult CinderellaLearner::plan_and_act_episode(const Simulator& env,
                                                                         std::span<const double> s1,
                                                                         const StreamKey& key) {
  EpisodeResult result;
  result.summary = begin_episode(s1);
  result.episode = run_episode(
    env, [this](int h, std::span<const double> s) { return act(h, s); }, s1, key);
  end_episode(result.episode);
  return result;
}

} // namespace cinderella
