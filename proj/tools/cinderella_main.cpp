#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cinderella/checks.hpp"
#include "cinderella/config.hpp"
#include "cinderella/harness.hpp"
#include "cinderella/oracle.hpp"

using namespace cinderella;

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  const RunConfig config = load_config(config_path);
  const RegretTrace trace = run_experiment(config);
  write_run_outputs(trace, out_dir);
  fmt::print("episodes={} cum_regret={:.9g} avg_regret={:.9g} out={}\n", trace.rows.size(), trace.cumulative_regret(),
             trace.average_regret(), out_dir);
  return 0;
}

int cmd_sweep(const std::string& config_path, int jobs, const std::string& out_dir) {
  const auto configs = load_sweep(config_path);
  const auto traces = run_sweep(configs, jobs);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const std::string stem = fmt::format("run{:03d}", i);
    write_run_outputs(traces[i], out_dir, stem);
    fmt::print("{} epsilon={:.6g} seed={} cum_regret={:.9g} avg_regret={:.9g}\n", stem, traces[i].meta.epsilon,
               traces[i].meta.seed, traces[i].cumulative_regret(), traces[i].average_regret());
  }
  return 0;
}

int cmd_oracle(const std::string& config_path) {
  const RunConfig config = load_config(config_path);
  const auto env = make_environment(config);
  const GridDP dp = dp_solve(*env, config.oracle.state_grid, config.oracle.action_grid);
  std::vector<double> s1 = config.initial_state.point;
  if (config.initial_state.mode == "uniform") s1.assign(static_cast<std::size_t>(env->state_dim()), 0.0);
  std::cout << oracle_report(*env, dp, s1).dump(2) << '\n';
  return 0;
}

int cmd_check(const std::string& level) {
  const CheckReport report = check_suite(level == "full" ? CheckLevel::Full : CheckLevel::Quick);
  std::cout << report.to_json().dump(2) << '\n';
  return report.all_passed() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimistic learner for locally linearizable MDPs: experiments, oracles and checks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  int jobs = 1;
  std::string level = "quick";

  auto* run = app.add_subcommand("run", "Run one experiment and write CSV + JSON metadata");
  run->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Run a list or grid of experiments");
  sweep->add_option("--config", config_path, "JSON sweep file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_dir, "Output directory");

  auto* oracle = app.add_subcommand("oracle", "Print the optimal-value report of a config");
  oracle->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);

  auto* check = app.add_subcommand("check", "Run the invariant suites");
  check->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, out_dir);
    if (*sweep) return cmd_sweep(config_path, jobs, out_dir);
    if (*oracle) return cmd_oracle(config_path);
    if (*check) return cmd_check(level);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
