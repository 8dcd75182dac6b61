#include "cinderella/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cinderella/error.hpp"
#include "cinderella/rng.hpp"
#include "scratch.hpp"

namespace cinderella {

namespace {

constexpr int kMaxOracleStateDim = 2;

void check_oracle_env(const EnvironmentModel& env) {
  if (env.state_dim() > kMaxOracleStateDim) {
    throw Error(ErrorCode::OracleTooLarge, "grid oracles support state dimension <= 2");
  }
}

// Trapezoid weight of lattice point n (product over axes).
double cell_weight(const Lattice& lattice, std::size_t n) {
  const int m = lattice.points_per_axis();
  if (m == 1) return std::pow(2.0, lattice.dim());
  double w = 1.0;
  std::size_t rest = n;
  for (int axis = 0; axis < lattice.dim(); ++axis) {
    const auto i = static_cast<int>(rest % m);
    rest /= m;
    w *= (i == 0 || i == m - 1) ? 0.5 * lattice.spacing() : lattice.spacing();
  }
  return w;
}

double expected_next(const EnvironmentModel& env, const Lattice& states, int h, std::span<const double> z,
                     std::span<const double> next_values) {
  std::vector<double> w(states.size());
  transition_weights(env, states, h, z, w);
  double ev = 0.0;
  for (std::size_t l = 0; l < w.size(); ++l) ev += w[l] * next_values[l];
  return ev;
}

void fill_z(std::span<double> z, std::span<const double> s, std::span<const double> a) {
  std::copy(s.begin(), s.end(), z.begin());
  std::copy(a.begin(), a.end(), z.begin() + static_cast<std::ptrdiff_t>(s.size()));
}

} // namespace

void transition_weights(const EnvironmentModel& env, const Lattice& states, int h, std::span<const double> z,
                        std::span<double> weights) {
  double total = 0.0;
  for (std::size_t l = 0; l < states.size(); ++l) {
    weights[l] = env.transition_density(h, z, states[l]) * cell_weight(states, l);
    total += weights[l];
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::ResolutionTooSmall, "transition density vanishes on every lattice state");
  }
  for (std::size_t l = 0; l < states.size(); ++l) weights[l] /= total;
}

double backup_value(const EnvironmentModel& env, const Lattice& states, int h, std::span<const double> z,
                    std::span<const double> next_values) {
  return std::clamp(env.reward_mean(h, z) + expected_next(env, states, h, z, next_values), 0.0, 1.0);
}

GridDP dp_solve(const EnvironmentModel& env, int state_points, int action_points) {
  check_oracle_env(env);
  if (state_points < 2 || action_points < 2) {
    throw Error(ErrorCode::ResolutionTooSmall, "dp_solve needs >= 2 lattice points per axis");
  }
  GridDP dp{Lattice(env.state_dim(), state_points), Lattice(env.action_dim(), action_points), env.horizon(), {}, {}};
  const std::size_t S = dp.states.size();
  const std::size_t A = dp.actions.size();
  const int H = env.horizon();
  dp.V.assign(H + 1, std::vector<double>(S, 0.0));
  dp.Q.assign(H, std::vector<double>(S * A, 0.0));
  std::vector<double> z(env.input_dim());
  const bool cache = !env.action_affects_transition();
  for (int h = H - 1; h >= 0; --h) {
    const auto& next = dp.V[h + 1];
    for (std::size_t i = 0; i < S; ++i) {
      double ev = 0.0;
      double best = 0.0;
      for (std::size_t j = 0; j < A; ++j) {
        fill_z(z, dp.states[i], dp.actions[j]);
        if (!cache || j == 0) ev = expected_next(env, dp.states, h, z, next);
        const double q = std::clamp(env.reward_mean(h, z) + ev, 0.0, 1.0);
        dp.Q[h][i * A + j] = q;
        best = j == 0 ? q : std::max(best, q);
      }
      dp.V[h][i] = best;
    }
  }
  return dp;
}

double optimal_value(const EnvironmentModel& env, const GridDP& dp, int h, std::span<const double> state) {
  if (h >= dp.horizon) return 0.0;
  std::vector<double> z(env.input_dim());
  const bool cache = !env.action_affects_transition();
  double ev = 0.0;
  double best = 0.0;
  for (std::size_t j = 0; j < dp.actions.size(); ++j) {
    fill_z(z, state, dp.actions[j]);
    if (!cache || j == 0) ev = expected_next(env, dp.states, h, z, dp.V[h + 1]);
    const double q = std::clamp(env.reward_mean(h, z) + ev, 0.0, 1.0);
    best = j == 0 ? q : std::max(best, q);
  }
  return best;
}

Policy dp_greedy_policy(const EnvironmentModel& env, const GridDP& dp) {
  return [&env, &dp](int h, std::span<const double> s) {
    std::vector<double> z(env.input_dim());
    std::size_t best = 0;
    double best_q = -1.0;
    for (std::size_t j = 0; j < dp.actions.size(); ++j) {
      fill_z(z, s, dp.actions[j]);
      const double q = backup_value(env, dp.states, h, z, dp.V[h + 1]);
      if (q > best_q) {
        best_q = q;
        best = j;
      }
    }
    const auto a = dp.actions[best];
    return std::vector<double>(a.begin(), a.end());
  };
}

double policy_value(const EnvironmentModel& env, const GridDP& dp, const Policy& policy,
                    std::span<const double> s1) {
  check_oracle_env(env);
  const std::size_t S = dp.states.size();
  const int H = dp.horizon;
  std::vector<double> next(S, 0.0);
  std::vector<double> current(S, 0.0);
  std::vector<double> z(env.input_dim());
  for (int h = H - 1; h >= 1; --h) {
    for (std::size_t i = 0; i < S; ++i) {
      const std::vector<double> a = policy(h, dp.states[i]);
      fill_z(z, dp.states[i], a);
      current[i] = backup_value(env, dp.states, h, z, next);
    }
    std::swap(next, current);
  }
  const std::vector<double> a = policy(0, s1);
  fill_z(z, s1, a);
  return backup_value(env, dp.states, 0, z, next);
}

double uniform_policy_value(const EnvironmentModel& env, const GridDP& dp, std::span<const double> s1) {
  check_oracle_env(env);
  const std::size_t S = dp.states.size();
  const std::size_t A = dp.actions.size();
  std::vector<double> next(S, 0.0);
  std::vector<double> current(S, 0.0);
  std::vector<double> z(env.input_dim());
  auto average_q = [&](int h, std::span<const double> s, const std::vector<double>& values) {
    double total = 0.0;
    for (std::size_t j = 0; j < A; ++j) {
      fill_z(z, s, dp.actions[j]);
      total += backup_value(env, dp.states, h, z, values);
    }
    return total / static_cast<double>(A);
  };
  for (int h = dp.horizon - 1; h >= 1; --h) {
    for (std::size_t i = 0; i < S; ++i) current[i] = average_q(h, dp.states[i], next);
    std::swap(next, current);
  }
  return average_q(0, s1, next);
}

nlohmann::json oracle_report(const EnvironmentModel& env, const GridDP& dp, std::span<const double> s1) {
  nlohmann::json j;
  j["env"] = env.name();
  j["horizon"] = dp.horizon;
  j["s1"] = std::vector<double>(s1.begin(), s1.end());
  j["v_star_s1"] = optimal_value(env, dp, 0, s1);
  j["v_uniform_s1"] = uniform_policy_value(env, dp, s1);
  j["state_grid"] = dp.states.points_per_axis();
  j["action_grid"] = dp.actions.points_per_axis();
  // Witness: lattice state with the largest V*_1.
  const auto& v1 = dp.V[0];
  const auto best = static_cast<std::size_t>(std::max_element(v1.begin(), v1.end()) - v1.begin());
  j["v_star_max"] = v1[best];
  j["v_star_argmax"] = std::vector<double>(dp.states[best].begin(), dp.states[best].end());
  return j;
}

// ---------------------------------------------------------------------------

double minimax_fit(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y, double radius, int iterations,
                   Eigen::VectorXd* theta_out) {
  const Eigen::Index m = phi.rows();
  const Eigen::Index d = phi.cols();
  if (m == 0) {
    if (theta_out) *theta_out = Eigen::VectorXd::Zero(d);
    return 0.0;
  }
  auto clamp_box = [radius](Eigen::VectorXd& t) {
    for (Eigen::Index j = 0; j < t.size(); ++j) t[j] = std::clamp(t[j], -radius, radius);
  };

  // One feature that is constant over the region: the midrange is optimal.
  if (d == 1 && (phi.col(0).array() == phi(0, 0)).all()) {
    Eigen::VectorXd t(1);
    const double c = phi(0, 0);
    t[0] = c == 0.0 ? 0.0 : 0.5 * (y.maxCoeff() + y.minCoeff()) / c;
    clamp_box(t);
    if (theta_out) *theta_out = t;
    return (phi * t - y).cwiseAbs().maxCoeff();
  }

  Eigen::VectorXd w = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  Eigen::VectorXd best_theta = Eigen::VectorXd::Zero(d);
  double best = (phi * best_theta - y).cwiseAbs().maxCoeff();
  for (int it = 0; it < std::max(iterations, 1); ++it) {
    Eigen::MatrixXd A = phi.transpose() * w.asDiagonal() * phi;
    A.diagonal().array() += 1e-13 * (1.0 + A.trace());
    Eigen::VectorXd t = A.ldlt().solve(phi.transpose() * w.cwiseProduct(y));
    clamp_box(t);
    const Eigen::VectorXd r = (phi * t - y).cwiseAbs();
    const double err = r.maxCoeff();
    if (err < best) {
      best = err;
      best_theta = t;
    }
    if (err < 1e-14) break;
    w = w.cwiseProduct(r);
    const double total = w.sum();
    if (!(total > 0.0)) break;
    w /= total;
  }
  if (theta_out) *theta_out = best_theta;
  return best;
}

nlohmann::json InherentErrorReport::to_json() const {
  nlohmann::json j;
  j["estimate"] = estimate;
  j["kind"] = "lower-estimate";
  j["witness_step"] = witness_step;
  j["witness"] = witness;
  j["candidates_per_step"] = candidates_per_step;
  for (const auto& s : per_step) j["per_step"].push_back({{"h", s.h}, {"value", s.value}, {"witness", s.witness}});
  return j;
}

InherentErrorReport inherent_error_estimate(const EnvironmentModel& env, const LocalFeatureMap& features,
                                            const ThetaBoxes& boxes, const InherentGrid& grid) {
  check_oracle_env(env);
  if (grid.eval_points < 2 || grid.quad_states < 2 || grid.action_points < 2) {
    throw Error(ErrorCode::ResolutionTooSmall, "inherent error grids need >= 2 points per axis");
  }
  if (!(boxes.radius >= 0.0) || !std::isfinite(boxes.radius) || !(boxes.fit_radius >= 0.0) ||
      !std::isfinite(boxes.fit_radius) || boxes.grid_points < 1) {
    throw Error(ErrorCode::InvalidParameter, "theta boxes need finite radii and >= 1 grid point");
  }
  if (features.input_dim() != env.input_dim()) {
    throw Error(ErrorCode::InvalidParameter, "feature map input dimension must equal d_S + d_A");
  }

  const int ds = env.state_dim();
  const int H = env.horizon();
  const std::size_t d = features.feature_dim();
  const std::size_t N = features.num_regions();
  const Lattice eval(env.input_dim(), grid.eval_points);
  const Lattice states(ds, grid.quad_states);
  const Lattice actions(env.action_dim(), grid.action_points);
  const std::size_t E = eval.size();
  const std::size_t L = states.size();
  const std::size_t J = actions.size();

  // Features at the evaluation points, grouped by region.
  std::vector<std::vector<std::size_t>> members(N);
  std::vector<Eigen::MatrixXd> region_phi(N);
  {
    std::vector<double> phi(d);
    std::vector<std::vector<double>> rows(N);
    for (std::size_t e = 0; e < E; ++e) {
      const std::size_t n = features.region(eval[e]).value;
      features.evaluate(eval[e], phi);
      members[n].push_back(e);
      rows[n].insert(rows[n].end(), phi.begin(), phi.end());
    }
    for (std::size_t n = 0; n < N; ++n) {
      region_phi[n].resize(static_cast<Eigen::Index>(members[n].size()), static_cast<Eigen::Index>(d));
      for (std::size_t r = 0; r < members[n].size(); ++r) {
        for (std::size_t j = 0; j < d; ++j) region_phi[n](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = rows[n][r * d + j];
      }
    }
  }

  // Features on (next state, action) pairs for the inner max.
  std::vector<double> next_phi(L * J * d);
  std::vector<std::size_t> next_region(L * J);
  {
    std::vector<double> z(env.input_dim());
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t j = 0; j < J; ++j) {
        fill_z(z, states[l], actions[j]);
        next_region[l * J + j] = features.region(z).value;
        features.evaluate(z, std::span<double>(next_phi).subspan((l * J + j) * d, d));
      }
    }
  }

  // Candidate stacks for theta_{h+1}.
  std::vector<std::vector<Eigen::VectorXd>> candidates;
  {
    const std::size_t coords = N * d;
    const int g = boxes.grid_points;
    auto axis_value = [&](int i) { return g == 1 ? 0.0 : -boxes.radius + 2.0 * boxes.radius * i / (g - 1); };
    auto make_stack = [&](const std::vector<int>& digits) {
      std::vector<Eigen::VectorXd> stack(N, Eigen::VectorXd(static_cast<Eigen::Index>(d)));
      for (std::size_t c = 0; c < coords; ++c) stack[c / d][static_cast<Eigen::Index>(c % d)] = axis_value(digits[c]);
      return stack;
    };
    const double log_total = static_cast<double>(coords) * std::log(static_cast<double>(g));
    std::vector<int> digits(coords, 0);
    if (log_total <= std::log(static_cast<double>(boxes.max_candidates)) + 1e-9) {
      for (;;) {
        candidates.push_back(make_stack(digits));
        std::size_t pos = coords;
        bool more = false;
        while (pos-- > 0) {
          if (++digits[pos] < g) {
            more = true;
            break;
          }
          digits[pos] = 0;
        }
        if (!more) break;
      }
    } else {
      Rng rng = make_stream({boxes.seed, 0, 0, 0, StreamPurpose::Oracle});
      std::uniform_int_distribution<int> pick(0, g - 1);
      for (std::size_t c = 0; c < boxes.max_candidates; ++c) {
        for (auto& digit : digits) digit = pick(rng);
        candidates.push_back(make_stack(digits));
      }
    }
    for (const auto& stack : boxes.extra) {
      if (stack.size() != N) throw Error(ErrorCode::InvalidParameter, "extra theta stack must hold N vectors");
      candidates.push_back(stack);
    }
  }

  InherentErrorReport report;
  report.candidates_per_step = candidates.size();
  report.estimate = -1.0;
  Eigen::MatrixXd weights(static_cast<Eigen::Index>(E), static_cast<Eigen::Index>(L));
  std::vector<double> w(L);
  std::vector<double> reward(E);
  std::vector<double> v_next(L);
  for (int h = 0; h < H; ++h) {
    for (std::size_t e = 0; e < E; ++e) {
      reward[e] = env.reward_mean(h, eval[e]);
      transition_weights(env, states, h, eval[e], w);
      for (std::size_t l = 0; l < L; ++l) weights(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(l)) = w[l];
    }
    const bool last = h == H - 1;
    const std::size_t rounds = last ? 1 : candidates.size();
    StepInherentError step{h + 1, -1.0, {}};
    for (std::size_t c = 0; c < rounds; ++c) {
      // V(s') = max_a Q_{h+1}[theta](s', a); zero past the horizon.
      Eigen::VectorXd vn = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(L));
      if (!last) {
        const auto& stack = candidates[c];
        for (std::size_t l = 0; l < L; ++l) {
          double best = -std::numeric_limits<double>::infinity();
          for (std::size_t j = 0; j < J; ++j) {
            const double* phi = next_phi.data() + (l * J + j) * d;
            const Eigen::VectorXd& theta = stack[next_region[l * J + j]];
            double v = 0.0;
            for (std::size_t k = 0; k < d; ++k) v += phi[k] * theta[static_cast<Eigen::Index>(k)];
            best = std::max(best, v);
          }
          vn[static_cast<Eigen::Index>(l)] = best;
        }
      }
      const Eigen::VectorXd image = weights * vn;
      for (std::size_t n = 0; n < N; ++n) {
        if (members[n].empty()) continue;
        Eigen::VectorXd y(static_cast<Eigen::Index>(members[n].size()));
        for (std::size_t r = 0; r < members[n].size(); ++r) {
          const std::size_t e = members[n][r];
          y[static_cast<Eigen::Index>(r)] = reward[e] + image[static_cast<Eigen::Index>(e)];
        }
        Eigen::VectorXd theta;
        const double err = minimax_fit(region_phi[n], y, boxes.fit_radius, grid.fit_iterations, &theta);
        if (err > step.value) {
          Eigen::Index worst = 0;
          (region_phi[n] * theta - y).cwiseAbs().maxCoeff(&worst);
          const auto z = eval[members[n][static_cast<std::size_t>(worst)]];
          step.value = err;
          step.witness.assign(z.begin(), z.end());
        }
      }
    }
    step.value = std::max(step.value, 0.0);
    if (step.value > report.estimate) {
      report.estimate = step.value;
      report.witness_step = step.h;
      report.witness = step.witness;
    }
    report.per_step.push_back(std::move(step));
  }
  report.estimate = std::max(report.estimate, 0.0);
  return report;
}

// ---------------------------------------------------------------------------

TaylorCheckResult taylor_remainder_check(const std::function<double(std::span<const double>)>& f,
                                         const DerivativeOracle& derivative, int dim, double nu, double L_nu,
                                         double epsilon, int grid_points) {
  if (grid_points < 2) throw Error(ErrorCode::ResolutionTooSmall, "taylor check needs >= 2 grid points");
  const Partition partition(dim, epsilon);
  const TaylorFeatureMap map(partition, nu_star(nu));
  std::vector<std::vector<double>> coefficients(partition.size());
  for (std::size_t n = 0; n < partition.size(); ++n) {
    coefficients[n] = taylor_coefficients(map.index_set(), derivative, partition.center(RegionIndex{n}));
  }
  const Lattice lattice(dim, grid_points);
  std::vector<double> phi(map.feature_dim());
  TaylorCheckResult result;
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const auto z = lattice[i];
    map.evaluate(z, phi);
    const auto& theta = coefficients[map.region(z).value];
    double fit = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j) fit += phi[j] * theta[j];
    const double err = std::abs(f(z) - fit);
    if (err > result.max_error) {
      result.max_error = err;
      result.witness.assign(z.begin(), z.end());
    }
  }
  result.bound = L_nu * std::pow(epsilon, nu);
  result.within_bound = result.max_error <= result.bound;
  return result;
}

} // namespace cinderella
