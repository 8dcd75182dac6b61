#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cinderella/config.hpp"
#include "cinderella/envs.hpp"
#include "cinderella/learner.hpp"
#include "cinderella/oracle.hpp"

namespace cinderella {

struct RegretRow {
  long long k = 0;
  double ret = 0.0;
  double vstar = 0.0;
  double vpi = 0.0;
  double regret = 0.0;
  double cum_regret = 0.0;
  double ms = 0.0;
};

struct RunMetadata {
  std::string config_hash;
  std::string env;
  PlannerKind planner = PlannerKind::Relaxation;
  std::size_t regions = 0;
  std::size_t feature_dim = 0;
  double epsilon = 1.0;
  int degree = 0;
  std::uint64_t seed = 0;
  std::size_t run_index = 0;
  int oracle_state_grid = 0;
  int oracle_action_grid = 0;
  double v_uniform_s1 = 0.0;  // fixed initial state only
  nlohmann::json config;
};

struct RegretTrace {
  std::vector<RegretRow> rows;
  RunMetadata meta;
  std::vector<nlohmann::json> planning_log;

  double cumulative_regret() const { return rows.empty() ? 0.0 : rows.back().cum_regret; }
  double average_regret() const { return rows.empty() ? 0.0 : cumulative_regret() / static_cast<double>(rows.size()); }
};

/// Deterministic agent that plays a fixed policy and ignores feedback.
class FixedPolicyAgent final : public Agent {
public:
  explicit FixedPolicyAgent(Policy policy) : policy_(std::move(policy)) {}
  PlanningSummary begin_episode(std::span<const double>) override { return {}; }
  std::vector<double> act(int h, std::span<const double> s) const override { return policy_(h, s); }
  void end_episode(const Episode&) override {}

private:
  Policy policy_;
};

/// Builds the agent of a run. The environment and the oracle tables outlive it.
using AgentFactory = std::function<std::unique_ptr<Agent>(const EnvironmentModel&, const GridDP&)>;

/// Runs one experiment. Random streams are keyed by (config seed, run_index).
/// Without a factory the agent is a CinderellaLearner built from the config.
RegretTrace run_experiment(const RunConfig& config, std::size_t run_index = 0, const AgentFactory& factory = {});

struct RunFailure {
  std::size_t run = 0;
  std::string message;
};

class SweepError : public std::runtime_error {
public:
  explicit SweepError(std::vector<RunFailure> failures);
  const std::vector<RunFailure>& failures() const noexcept { return failures_; }

private:
  std::vector<RunFailure> failures_;
};

/// Runs configs on `jobs` threads; run i uses run index i. Results follow
/// input order. Throws SweepError listing every failed run.
std::vector<RegretTrace> run_sweep(const std::vector<RunConfig>& configs, int jobs);

/// Header `k,ret,vstar,vpi,regret,cum_regret,ms`; 9 significant digits.
void write_csv(const RegretTrace& trace, std::ostream& out);
std::string csv_string(const RegretTrace& trace);
nlohmann::json metadata_json(const RegretTrace& trace);

/// Writes <stem>.csv, <stem>.json and <stem>.planning.jsonl into dir.
void write_run_outputs(const RegretTrace& trace, const std::filesystem::path& dir, const std::string& stem = "run");

/// Least-squares slope of log(cum_regret) against log(k) over rows with
/// k > (1 - tail) K and positive cumulative regret.
double loglog_slope(std::span<const double> cum_regret, double tail = 0.5);

} // namespace cinderella
