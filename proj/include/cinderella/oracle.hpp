#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cinderella/envs.hpp"
#include "cinderella/features.hpp"
#include "cinderella/geometry.hpp"

namespace cinderella {

/// Backward induction on a state lattice and an action lattice.
///
/// Expectations use the transition density at the lattice states with
/// trapezoid cell weights, renormalized to sum to one so no probability mass
/// leaks at the grid edges. V[h] has one entry per state (h = 0..H, V[H] = 0);
/// Q[h] is row-major in (state, action). Entries are clipped to [0, 1].
struct GridDP {
  Lattice states;
  Lattice actions;
  int horizon = 0;
  std::vector<std::vector<double>> V;
  std::vector<std::vector<double>> Q;

  double q(int h, std::size_t state, std::size_t action) const { return Q[h][state * actions.size() + action]; }
};

GridDP dp_solve(const EnvironmentModel& env, int state_points, int action_points);

/// Normalized quadrature weights of p_h(. | z) over `states`. Throws
/// ResolutionTooSmall when the density misses every lattice point.
void transition_weights(const EnvironmentModel& env, const Lattice& states, int h, std::span<const double> z,
                        std::span<double> weights);

/// clip(r_h(z) + sum_l w_l next_values[l], 0, 1).
double backup_value(const EnvironmentModel& env, const Lattice& states, int h, std::span<const double> z,
                    std::span<const double> next_values);

/// Optimal value at an arbitrary state: max over the DP action lattice of a
/// one-step backup against V[h + 1].
double optimal_value(const EnvironmentModel& env, const GridDP& dp, int h, std::span<const double> state);

/// Greedy policy of the DP tables (ties to the smallest action index).
Policy dp_greedy_policy(const EnvironmentModel& env, const GridDP& dp);

/// V^pi_1(s1) of a deterministic policy, by backward induction on dp's state lattice.
double policy_value(const EnvironmentModel& env, const GridDP& dp, const Policy& policy,
                    std::span<const double> s1);

/// V_1(s1) of the policy drawing actions uniformly from dp's action lattice.
double uniform_policy_value(const EnvironmentModel& env, const GridDP& dp, std::span<const double> s1);

/// JSON report of V*_1 at s1 with the grid sizes it was computed on.
nlohmann::json oracle_report(const EnvironmentModel& env, const GridDP& dp, std::span<const double> s1);

// ---------------------------------------------------------------------------
// Inherent Bellman error

/// Candidate next-step parameters: the box [-radius, radius]^(N d) sampled on
/// `grid_points` values per coordinate. The full grid is used when it has at
/// most `max_candidates` points, otherwise `max_candidates` grid points are
/// drawn at random. `extra` adds specific stacks (N vectors each), e.g. the
/// parameters a learner produced. The per-region fit searches the separate
/// box [-fit_radius, fit_radius]^d: with unclipped linear values a common box
/// is not mapped into itself by the Bellman operator.
struct ThetaBoxes {
  double radius = 1.0;
  double fit_radius = 1e3;
  int grid_points = 3;
  std::size_t max_candidates = 128;
  std::uint64_t seed = 0;
  std::vector<std::vector<Eigen::VectorXd>> extra;
};

struct InherentGrid {
  int eval_points = 33;   // per axis of z
  int quad_states = 65;   // per state axis
  int action_points = 33; // per action axis
  int fit_iterations = 200;
};

struct StepInherentError {
  int h = 1;  // 1-based
  double value = 0.0;
  std::vector<double> witness;
};

/// Sampled sup over next-step parameters of the best per-region minimax fit
/// to the Bellman image. Sampling the sup makes this a lower estimate.
struct InherentErrorReport {
  double estimate = 0.0;
  int witness_step = 1;
  std::vector<double> witness;
  std::vector<StepInherentError> per_step;
  std::size_t candidates_per_step = 0;

  nlohmann::json to_json() const;
};

InherentErrorReport inherent_error_estimate(const EnvironmentModel& env, const LocalFeatureMap& features,
                                            const ThetaBoxes& boxes, const InherentGrid& grid = {});

/// min over theta with |theta_j| <= radius of max_i |phi_i' theta - y_i|,
/// solved by Lawson's iteratively reweighted least squares. Rows of `phi`
/// are feature vectors. Returns the attained max residual.
double minimax_fit(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y, double radius, int iterations,
                   Eigen::VectorXd* theta = nullptr);

// ---------------------------------------------------------------------------
// Taylor remainder

struct TaylorCheckResult {
  double max_error = 0.0;
  double bound = 0.0;  // L_nu * epsilon^nu
  bool within_bound = false;
  std::vector<double> witness;
};

/// Fits f on a partition of [-1,1]^dim by the Taylor polynomials of degree
/// ceil(nu - 1) at the cell centers and measures the sup error on a lattice
/// with `grid_points` per axis.
TaylorCheckResult taylor_remainder_check(const std::function<double(std::span<const double>)>& f,
                                         const DerivativeOracle& derivative, int dim, double nu, double L_nu,
                                         double epsilon, int grid_points);

} // namespace cinderella
