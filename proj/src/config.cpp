#include "cinderella/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "cinderella/error.hpp"
#include "cinderella/geometry.hpp"

namespace cinderella {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); }

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) invalid(fmt::format("{} must be a JSON object", where));
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) invalid(fmt::format("unknown key '{}' in {}", key, where));
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    invalid(fmt::format("bad value for '{}': {}", key, e.what()));
  }
}

// "auto" or a number.
void read_auto(const json& j, const char* key, std::optional<double>& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (v.is_string() && v.get<std::string>() == "auto") {
    out.reset();
  } else if (v.is_number()) {
    out = v.get<double>();
  } else {
    invalid(fmt::format("'{}' must be \"auto\" or a number", key));
  }
}

json auto_or(const std::optional<double>& v) { return v ? json(*v) : json("auto"); }

PlannerKind parse_planner(const std::string& s) {
  if (s == "relaxation") return PlannerKind::Relaxation;
  if (s == "exact-grid") return PlannerKind::ExactGrid;
  invalid(fmt::format("planner must be relaxation or exact-grid, got '{}'", s));
}

RewardSpec reward_spec(const EnvConfig& env) {
  RewardSpec spec;
  if (env.reward == "zero") {
    spec.kind = RewardSpec::Kind::Zero;
  } else if (env.reward == "constant") {
    spec.kind = RewardSpec::Kind::Constant;
    spec.value = env.reward_value;
  }
  return spec;
}

std::vector<Eigen::VectorXd> exact_linear_theta(const RunConfig& c, const MultiIndexSet& indices) {
  std::vector<Eigen::VectorXd> thetas;
  const auto d = static_cast<Eigen::Index>(indices.size());
  if (c.env.theta.empty()) {
    // 0.5 on the constant, 0.1 on s and 0.3 on a, scaled by 1/H.
    Eigen::VectorXd t = Eigen::VectorXd::Zero(d);
    t[0] = 0.5;
    if (d >= 3) {
      t[1] = 0.1;
      t[2] = 0.3;
    }
    t /= static_cast<double>(c.horizon);
    thetas.assign(static_cast<std::size_t>(c.horizon), t);
    return thetas;
  }
  if (static_cast<int>(c.env.theta.size()) != c.horizon) invalid("env.theta needs one vector per step");
  for (const auto& row : c.env.theta) {
    if (static_cast<Eigen::Index>(row.size()) != d) {
      invalid(fmt::format("env.theta vectors need {} entries for feature_degree {}", d, c.env.feature_degree));
    }
    thetas.emplace_back(Eigen::Map<const Eigen::VectorXd>(row.data(), d));
  }
  return thetas;
}

} // namespace

void RunConfig::validate() const {
  static const std::set<std::string> envs{"uniform_shift", "smooth_drift", "exact_linear"};
  static const std::set<std::string> rewards{"default", "zero", "constant"};
  if (!envs.count(env.name)) invalid(fmt::format("unknown env '{}'", env.name));
  if (!rewards.count(env.reward)) invalid(fmt::format("unknown reward '{}'", env.reward));
  if (!(env.beta > 0.0 && env.beta < 1.0)) invalid("env.beta must lie in (0, 1)");
  if (!(env.reward_noise_sigma >= 0.0)) invalid("env.reward_noise_sigma must be >= 0");
  if (!(env.noise_sigma > 0.0)) invalid("env.noise_sigma must be > 0");
  if (!std::isfinite(env.drift_gain)) invalid("env.drift_gain must be finite");
  if (env.feature_degree < 0) invalid("env.feature_degree must be >= 0");
  if (episodes < 1) invalid("episodes must be >= 1");
  if (horizon < 1) invalid("horizon must be >= 1");
  if (!(nu > 0.0)) invalid("nu must be > 0");
  if (epsilon && !(*epsilon > 0.0)) invalid("epsilon must be > 0");
  if (!(lambda > 0.0)) invalid("lambda must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) invalid("delta must lie in (0, 1)");
  if (!std::isfinite(bonus_scale)) invalid("bonus_scale must be finite");
  if (!(inherent_bound >= 0.0)) invalid("inherent_bound must be >= 0");
  if (param_radius && !(*param_radius >= 0.0)) invalid("param_radius must be >= 0");
  if (action_grid < 1) invalid("action_grid must be >= 1");
  if (exact_grid_resolution < 1 || exact_grid_resolution > 5) invalid("exact_grid_resolution must lie in [1, 5]");
  if (oracle.state_grid < 2 || oracle.action_grid < 2) invalid("oracle grids need >= 2 points");
  if (initial_state.mode != "fixed" && initial_state.mode != "uniform") {
    invalid("initial_state.mode must be fixed or uniform");
  }
  for (double x : initial_state.point) {
    if (!(x >= -1.0 && x <= 1.0)) invalid("initial_state.point must lie in [-1, 1]");
  }
  if (!(target_clip_lo < target_clip_hi)) invalid("target_clip needs lo < hi");
}

json RunConfig::to_json() const {
  json e{{"name", env.name},
         {"beta", env.beta},
         {"reward", env.reward},
         {"reward_value", env.reward_value},
         {"reward_noise_sigma", env.reward_noise_sigma},
         {"drift_gain", env.drift_gain},
         {"noise_sigma", env.noise_sigma},
         {"feature_degree", env.feature_degree},
         {"theta", env.theta}};
  return json{{"env", e},
              {"episodes", episodes},
              {"horizon", horizon},
              {"nu", nu},
              {"epsilon", auto_or(epsilon)},
              {"lambda", lambda},
              {"delta", delta},
              {"bonus_scale", bonus_scale},
              {"inherent_bound", inherent_bound},
              {"param_radius", auto_or(param_radius)},
              {"action_grid", action_grid},
              {"planner", to_string(planner)},
              {"exact_grid_resolution", exact_grid_resolution},
              {"seed", seed},
              {"oracle", {{"state_grid", oracle.state_grid}, {"action_grid", oracle.action_grid}}},
              {"initial_state", {{"mode", initial_state.mode}, {"point", initial_state.point}}},
              {"normalize_features", normalize_features},
              {"target_clip", {target_clip_lo, target_clip_hi}}};
}

RunConfig RunConfig::from_json(const json& j) {
  reject_unknown(j,
                 {"env", "episodes", "horizon", "nu", "epsilon", "lambda", "delta", "bonus_scale", "inherent_bound",
                  "param_radius", "action_grid", "planner", "exact_grid_resolution", "seed", "oracle",
                  "initial_state", "normalize_features", "target_clip"},
                 "config");
  RunConfig c;
  if (j.contains("env")) {
    const json& e = j.at("env");
    reject_unknown(e,
                   {"name", "beta", "reward", "reward_value", "reward_noise_sigma", "drift_gain", "noise_sigma",
                    "feature_degree", "theta"},
                   "env");
    read(e, "name", c.env.name);
    read(e, "beta", c.env.beta);
    read(e, "reward", c.env.reward);
    read(e, "reward_value", c.env.reward_value);
    read(e, "reward_noise_sigma", c.env.reward_noise_sigma);
    read(e, "drift_gain", c.env.drift_gain);
    read(e, "noise_sigma", c.env.noise_sigma);
    read(e, "feature_degree", c.env.feature_degree);
    read(e, "theta", c.env.theta);
  }
  read(j, "episodes", c.episodes);
  read(j, "horizon", c.horizon);
  read(j, "nu", c.nu);
  read_auto(j, "epsilon", c.epsilon);
  read(j, "lambda", c.lambda);
  read(j, "delta", c.delta);
  read(j, "bonus_scale", c.bonus_scale);
  read(j, "inherent_bound", c.inherent_bound);
  read_auto(j, "param_radius", c.param_radius);
  read(j, "action_grid", c.action_grid);
  if (j.contains("planner")) {
    std::string p;
    read(j, "planner", p);
    c.planner = parse_planner(p);
  }
  read(j, "exact_grid_resolution", c.exact_grid_resolution);
  read(j, "seed", c.seed);
  if (j.contains("oracle")) {
    reject_unknown(j.at("oracle"), {"state_grid", "action_grid"}, "oracle");
    read(j.at("oracle"), "state_grid", c.oracle.state_grid);
    read(j.at("oracle"), "action_grid", c.oracle.action_grid);
  }
  if (j.contains("initial_state")) {
    reject_unknown(j.at("initial_state"), {"mode", "point"}, "initial_state");
    read(j.at("initial_state"), "mode", c.initial_state.mode);
    read(j.at("initial_state"), "point", c.initial_state.point);
  }
  read(j, "normalize_features", c.normalize_features);
  if (j.contains("target_clip")) {
    std::vector<double> clip;
    read(j, "target_clip", clip);
    if (clip.size() != 2) invalid("target_clip must be [lo, hi]");
    c.target_clip_lo = clip[0];
    c.target_clip_hi = clip[1];
  }
  c.validate();
  return c;
}

std::string config_hash(const RunConfig& config) {
  const std::string text = config.to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

void apply_seed_override(RunConfig& config) {
  const char* env = std::getenv("CINDERELLA_SEED");
  if (!env || !*env) return;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') invalid(fmt::format("CINDERELLA_SEED must be an unsigned integer, got '{}'", env));
  config.seed = v;
}

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid(fmt::format("cannot open config '{}'", path));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    invalid(fmt::format("cannot parse '{}': {}", path, e.what()));
  }
}

} // namespace

RunConfig load_config(const std::string& path) {
  RunConfig c = RunConfig::from_json(read_json_file(path));
  apply_seed_override(c);
  return c;
}

std::vector<RunConfig> expand_sweep(const json& j) {
  std::vector<RunConfig> out;
  if (j.is_array()) {
    for (const auto& item : j) out.push_back(RunConfig::from_json(item));
    return out;
  }
  reject_unknown(j, {"base", "grid"}, "sweep");
  const json base = j.value("base", json::object());
  const json grid = j.value("grid", json::object());
  if (!grid.is_object()) invalid("sweep grid must be an object of value lists");
  std::vector<std::pair<std::string, json>> axes;
  for (const auto& [key, values] : grid.items()) {
    if (!values.is_array() || values.empty()) invalid(fmt::format("sweep grid '{}' needs a non-empty list", key));
    axes.emplace_back(key, values);
  }
  std::vector<std::size_t> digits(axes.size(), 0);
  for (;;) {
    json cfg = base;
    for (std::size_t a = 0; a < axes.size(); ++a) cfg[axes[a].first] = axes[a].second[digits[a]];
    out.push_back(RunConfig::from_json(cfg));
    std::size_t pos = axes.size();
    bool more = false;
    while (pos-- > 0) {
      if (++digits[pos] < axes[pos].second.size()) {
        more = true;
        break;
      }
      digits[pos] = 0;
    }
    if (!more) break;
  }
  return out;
}

std::vector<RunConfig> load_sweep(const std::string& path) {
  std::vector<RunConfig> configs = expand_sweep(read_json_file(path));
  for (auto& c : configs) apply_seed_override(c);
  return configs;
}

std::unique_ptr<EnvironmentModel> make_environment(const RunConfig& c) {
  c.validate();
  if (c.env.name == "uniform_shift") {
    return env_uniform_shift(c.env.beta, reward_spec(c.env), c.horizon, c.env.reward_noise_sigma);
  }
  if (c.env.name == "smooth_drift") {
    return env_smooth_drift(c.env.drift_gain, c.env.noise_sigma, reward_spec(c.env), c.horizon,
                            c.env.reward_noise_sigma);
  }
  TaylorFeatureMap features(Partition(2, 1.0), c.env.feature_degree);
  auto thetas = exact_linear_theta(c, features.index_set());
  return env_exact_linear(std::move(thetas), std::move(features), 1, 1, c.env.reward_noise_sigma);
}

double resolved_epsilon(const RunConfig& c, int input_dim) {
  const double eps = c.epsilon ? *c.epsilon : auto_epsilon(c.episodes, input_dim, c.nu);
  return std::min(eps, 1.0);
}

LearnerOptions learner_options(const RunConfig& c, std::size_t feature_dim) {
  LearnerOptions o;
  o.lambda = c.lambda;
  o.delta = c.delta;
  o.bonus_scale = c.bonus_scale;
  o.inherent_bound = c.inherent_bound;
  o.param_radius = c.param_radius ? *c.param_radius : 2.0 * std::sqrt(static_cast<double>(feature_dim));
  o.action_grid = c.action_grid;
  o.planner = c.planner;
  o.exact_grid_resolution = c.exact_grid_resolution;
  o.target_clip_lo = c.target_clip_lo;
  o.target_clip_hi = c.target_clip_hi;
  o.episodes = c.episodes;
  return o;
}

} // namespace cinderella
