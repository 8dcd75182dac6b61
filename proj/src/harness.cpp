#include "cinderella/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "cinderella/error.hpp"
#include "cinderella/features.hpp"
#include "cinderella/geometry.hpp"

namespace cinderella {

namespace {

std::vector<double> initial_state(const RunConfig& c, int state_dim, std::size_t run, long long k) {
  if (c.initial_state.mode == "uniform") {
    Rng rng = make_stream({c.seed, run, static_cast<std::uint64_t>(k), 0, StreamPurpose::InitialState});
    std::vector<double> s(static_cast<std::size_t>(state_dim));
    for (double& x : s) x = uniform(rng, -1.0, 1.0);
    return s;
  }
  if (static_cast<int>(c.initial_state.point.size()) != state_dim) {
    throw Error(ErrorCode::ConfigInvalid,
                fmt::format("initial_state.point needs {} coordinates for env {}", state_dim, c.env.name));
  }
  return c.initial_state.point;
}

} // namespace

RegretTrace run_experiment(const RunConfig& config, std::size_t run_index, const AgentFactory& factory) {
  config.validate();
  const std::unique_ptr<EnvironmentModel> env = make_environment(config);
  const GridDP dp = dp_solve(*env, config.oracle.state_grid, config.oracle.action_grid);

  RegretTrace trace;
  RunMetadata& meta = trace.meta;
  meta.config_hash = config_hash(config);
  meta.env = env->name();
  meta.planner = config.planner;
  meta.seed = config.seed;
  meta.run_index = run_index;
  meta.oracle_state_grid = config.oracle.state_grid;
  meta.oracle_action_grid = config.oracle.action_grid;
  meta.config = config.to_json();

  std::unique_ptr<Agent> agent;
  if (factory) {
    agent = factory(*env, dp);
  } else {
    meta.epsilon = resolved_epsilon(config, env->input_dim());
    meta.degree = nu_star(config.nu);
    auto features = std::make_shared<const TaylorFeatureMap>(Partition(env->input_dim(), meta.epsilon), meta.degree,
                                                             config.normalize_features);
    meta.regions = features->num_regions();
    meta.feature_dim = features->feature_dim();
    agent = std::make_unique<CinderellaLearner>(features, env->state_dim(), env->action_dim(), env->horizon(),
                                                learner_options(config, features->feature_dim()));
  }

  const bool fixed_start = config.initial_state.mode == "fixed";
  double fixed_vstar = 0.0;
  if (fixed_start) {
    const auto s1 = initial_state(config, env->state_dim(), run_index, 1);
    fixed_vstar = optimal_value(*env, dp, 0, s1);
    meta.v_uniform_s1 = uniform_policy_value(*env, dp, s1);
  }

  trace.rows.reserve(static_cast<std::size_t>(config.episodes));
  double cumulative = 0.0;
  const Policy policy = [&agent](int h, std::span<const double> s) { return agent->act(h, s); };
  for (long long k = 1; k <= config.episodes; ++k) {
    const auto start = std::chrono::steady_clock::now();
    const auto s1 = initial_state(config, env->state_dim(), run_index, k);
    const PlanningSummary summary = agent->begin_episode(s1);
    const double vstar = fixed_start ? fixed_vstar : optimal_value(*env, dp, 0, s1);
    const double vpi = policy_value(*env, dp, policy, s1);
    const Episode episode =
      run_episode(*env, policy, s1, {config.seed, run_index, static_cast<std::uint64_t>(k), 0, StreamPurpose::Environment});
    agent->end_episode(episode);
    const auto stop = std::chrono::steady_clock::now();

    RegretRow row;
    row.k = k;
    row.ret = episode.total_return;
    row.vstar = vstar;
    row.vpi = vpi;
    row.regret = vstar - vpi;
    cumulative += row.regret;
    row.cum_regret = cumulative;
    row.ms = std::chrono::duration<double, std::milli>(stop - start).count();
    trace.rows.push_back(row);

    trace.planning_log.push_back({{"k", k},
                                  {"planner", to_string(summary.planner)},
                                  {"alpha_min", summary.alpha_min},
                                  {"alpha_mean", summary.alpha_mean},
                                  {"alpha_max", summary.alpha_max},
                                  {"visited_regions", summary.visited_regions},
                                  {"value_s1", summary.value_s1}});
  }
  return trace;
}

namespace {

std::string describe(const std::vector<RunFailure>& failures) {
  std::string msg = fmt::format("{} run(s) failed", failures.size());
  for (const auto& f : failures) msg += fmt::format("; run {}: {}", f.run, f.message);
  return msg;
}

} // namespace

SweepError::SweepError(std::vector<RunFailure> failures)
  : std::runtime_error(describe(failures)), failures_(std::move(failures)) {}

std::vector<RegretTrace> run_sweep(const std::vector<RunConfig>& configs, int jobs) {
  std::vector<RegretTrace> traces(configs.size());
  std::vector<RunFailure> failures;
  std::mutex failure_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        traces[i] = run_experiment(configs[i], i);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failures.push_back({i, e.what()});
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, jobs));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(threads, configs.size()); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end(), [](const auto& a, const auto& b) { return a.run < b.run; });
    throw SweepError(std::move(failures));
  }
  return traces;
}

void write_csv(const RegretTrace& trace, std::ostream& out) {
  out << "k,ret,vstar,vpi,regret,cum_regret,ms\n";
  for (const RegretRow& r : trace.rows) {
    out << fmt::format("{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", r.k, r.ret, r.vstar, r.vpi, r.regret,
                       r.cum_regret, r.ms);
  }
}

std::string csv_string(const RegretTrace& trace) {
  std::ostringstream out;
  write_csv(trace, out);
  return out.str();
}

nlohmann::json metadata_json(const RegretTrace& trace) {
  const RunMetadata& m = trace.meta;
  return {{"config_hash", m.config_hash},
          {"env", m.env},
          {"planner", to_string(m.planner)},
          {"regions", m.regions},
          {"feature_dim", m.feature_dim},
          {"epsilon", m.epsilon},
          {"degree", m.degree},
          {"seed", m.seed},
          {"run_index", m.run_index},
          {"episodes", trace.rows.size()},
          {"cum_regret", trace.cumulative_regret()},
          {"avg_regret", trace.average_regret()},
          {"oracle", {{"state_grid", m.oracle_state_grid}, {"action_grid", m.oracle_action_grid}}},
          {"v_uniform_s1", m.v_uniform_s1},
          {"config", m.config}};
}

void write_run_outputs(const RegretTrace& trace, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(dir / name);
    if (!out) throw Error(ErrorCode::InvalidParameter, fmt::format("cannot write {}", (dir / name).string()));
    return out;
  };
  {
    auto out = open(stem + ".csv");
    write_csv(trace, out);
  }
  {
    auto out = open(stem + ".json");
    out << metadata_json(trace).dump(2) << '\n';
  }
  auto out = open(stem + ".planning.jsonl");
  for (const auto& line : trace.planning_log) out << line.dump() << '\n';
}

double loglog_slope(std::span<const double> cum_regret, double tail) {
  const std::size_t K = cum_regret.size();
  const auto first = static_cast<std::size_t>(std::floor((1.0 - tail) * static_cast<double>(K)));
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = first; i < K; ++i) {
    if (!(cum_regret[i] > 0.0)) continue;
    const double x = std::log(static_cast<double>(i + 1));
    const double y = std::log(cum_regret[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return 0.0;
  const double nn = static_cast<double>(n);
  const double denom = nn * sxx - sx * sx;
  return denom > 0.0 ? (nn * sxy - sx * sy) / denom : 0.0;
}

} // namespace cinderella
