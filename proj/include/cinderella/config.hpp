#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cinderella/envs.hpp"
#include "cinderella/learner.hpp"

namespace cinderella {

struct EnvConfig {
  std::string name = "uniform_shift";  // uniform_shift | smooth_drift | exact_linear
  double beta = 0.5;
  std::string reward = "default";      // default | zero | constant
  double reward_value = -1.0;          // constant reward per step; negative selects 1/H
  double reward_noise_sigma = 0.1;
  double drift_gain = 1.0;
  double noise_sigma = 0.3;
  int feature_degree = 1;              // exact_linear: degree of the reward features
  std::vector<std::vector<double>> theta;  // exact_linear: one vector per step, empty selects the default
};

struct OracleGrid {
  int state_grid = 129;
  int action_grid = 65;
};

struct InitialState {
  std::string mode = "fixed";  // fixed | uniform
  std::vector<double> point{0.0};
};

/// One experiment. Every field has a default; unknown keys are rejected.
struct RunConfig {
  EnvConfig env;
  long long episodes = 100;
  int horizon = 2;
  double nu = 1.0;
  std::optional<double> epsilon;       // nullopt is "auto"
  double lambda = 1.0;
  double delta = 0.1;
  double bonus_scale = 0.1;
  double inherent_bound = 0.0;
  std::optional<double> param_radius;  // nullopt is "auto": 2 sqrt(d_feat)
  int action_grid = 21;
  PlannerKind planner = PlannerKind::Relaxation;
  int exact_grid_resolution = 3;
  std::uint64_t seed = 0;
  OracleGrid oracle;
  InitialState initial_state;
  bool normalize_features = false;
  double target_clip_lo = -1.0;
  double target_clip_hi = 2.0;

  /// Throws ConfigInvalid on any violated invariant.
  void validate() const;
  /// Canonical JSON with every field present.
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

/// FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// Parses a config file; a CINDERELLA_SEED environment variable overrides the seed.
RunConfig load_config(const std::string& path);

/// Sweep file: a JSON array of configs, or {"base": {...}, "grid": {"key": [values], ...}}
/// expanded as the cartesian product of top-level overrides (last key varies fastest).
std::vector<RunConfig> load_sweep(const std::string& path);
std::vector<RunConfig> expand_sweep(const nlohmann::json& j);

/// Applies CINDERELLA_SEED when set.
void apply_seed_override(RunConfig& config);

/// Environment instance described by the config.
std::unique_ptr<EnvironmentModel> make_environment(const RunConfig& config);

/// Epsilon after resolving "auto" and clamping into (0, 1].
double resolved_epsilon(const RunConfig& config, int input_dim);

/// Learner options derived from the config for a given feature dimension.
LearnerOptions learner_options(const RunConfig& config, std::size_t feature_dim);

} // namespace cinderella
