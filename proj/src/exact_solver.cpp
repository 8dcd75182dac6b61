#include <algorithm>
#include <cmath>
#include <limits>

#include "cinderella/error.hpp"
#include "cinderella/learner.hpp"
#include "scratch.hpp"

namespace cinderella {

namespace {

constexpr std::size_t kMaxCoordinates = 6;
constexpr int kMaxResolution = 5;

struct BlockSetup {
  double sqrt_alpha = 0.0;
  std::vector<double> axis;  // candidate values per coordinate
};

// phi(z)' theta_bar for the region of z, unclipped.
double linear_value(const LocalFeatureMap& features, const ThetaTable& table, int h, std::span<const double> z) {
  const std::size_t d = features.feature_dim();
  detail::Scratch phi(d);
  features.evaluate(z, phi.span());
  const Eigen::VectorXd& theta = table.at(h, features.region(z).value).theta_bar;
  double v = 0.0;
  for (std::size_t j = 0; j < d; ++j) v += phi[j] * theta[static_cast<Eigen::Index>(j)];
  return v;
}

// max over the action grid at state s; `clip` maps each value into [0, 1].
double grid_max(const LocalFeatureMap& features, const Lattice& actions, const ThetaTable& table, int h,
                std::span<const double> s, bool clip) {
  const std::size_t dz = s.size() + static_cast<std::size_t>(actions.dim());
  detail::Scratch z(dz);
  std::copy(s.begin(), s.end(), z.data());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const auto a = actions[i];
    std::copy(a.begin(), a.end(), z.data() + s.size());
    double v = linear_value(features, table, h, std::span<const double>(z.data(), dz));
    if (clip) v = std::clamp(v, 0.0, 1.0);
    best = std::max(best, v);
  }
  return best;
}

// Odometer over g^digits.size() combinations; false after the last one.
bool advance(std::vector<int>& digits, int g) {
  for (std::size_t pos = digits.size(); pos-- > 0;) {
    if (++digits[pos] < g) return true;
    digits[pos] = 0;
  }
  return false;
}

} // namespace

ThetaTable CinderellaLearner::solve_exact_grid(std::span<const double> s1, int g) const {
  const std::size_t N = regions();
  const std::size_t d = features_->feature_dim();
  const std::size_t blocks = static_cast<std::size_t>(horizon_) * N;
  const std::size_t coords = blocks * d;
  if (coords > kMaxCoordinates || g < 1 || g > kMaxResolution) {
    throw Error(ErrorCode::InstanceTooLarge, "exact grid solver needs H*N*d <= 6 and 1 <= g <= 5");
  }
  if (static_cast<int>(s1.size()) != state_dim_) throw Error(ErrorCode::OutOfDomain, "initial state dimension");

  const long long k = completed_ + 1;
  std::vector<BlockSetup> setup(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    const RegionRidgeState& ridge = ridges_[b];
    // An empty feasible set (negative radius) degenerates to xi = 0.
    setup[b].sqrt_alpha = std::max(0.0, alpha_radius(schedule_, k, ridge.count()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ridge.lam(), Eigen::EigenvaluesOnly);
    const double lam_min = eig.eigenvalues().minCoeff();
    const double radius = setup[b].sqrt_alpha / std::sqrt(lam_min);
    setup[b].axis.resize(static_cast<std::size_t>(g));
    for (int i = 0; i < g; ++i) setup[b].axis[i] = g == 1 ? 0.0 : -radius + 2.0 * radius * i / (g - 1);
  }

  ThetaTable candidate;
  candidate.horizon = horizon_;
  candidate.regions = N;
  candidate.blocks.resize(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    candidate.blocks[b].theta_hat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    candidate.blocks[b].theta_bar = candidate.blocks[b].theta_hat;
    candidate.blocks[b].sqrt_alpha = setup[b].sqrt_alpha;
  }

  // The last step regresses on rewards alone, so its estimate is fixed.
  auto regress = [&](int h, std::size_t n, const ThetaTable& table) {
    const RegionRidgeState& ridge = ridges_[index(h, n)];
    const SampleStore& store = samples_[index(h, n)];
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    for (std::size_t t = 0; t < store.size(); ++t) {
      double target = store.reward[t];
      if (h + 1 < horizon_) {
        const std::span<const double> next(store.next_state.data() + t * state_dim_,
                                           static_cast<std::size_t>(state_dim_));
        target += grid_max(*features_, actions_, table, h + 1, next, true);
      }
      target = clip_target(target);
      for (std::size_t j = 0; j < d; ++j) b[static_cast<Eigen::Index>(j)] += store.phi[t * d + j] * target;
    }
    return Eigen::VectorXd(ridge.lam_inv() * b);
  };
  std::vector<Eigen::VectorXd> last_step(N);
  for (std::size_t n = 0; n < N; ++n) last_step[n] = regress(horizon_ - 1, n, candidate);

  auto evaluate = [&](const std::vector<Eigen::VectorXd>& xi) {
    for (int h = horizon_ - 1; h >= 0; --h) {
      for (std::size_t n = 0; n < N; ++n) {
        ThetaBlock& block = candidate.at(h, n);
        block.theta_hat = h == horizon_ - 1 ? last_step[n] : regress(h, n, candidate);
        block.theta_bar = block.theta_hat + xi[index(h, n)];
      }
    }
    candidate.objective = grid_max(*features_, actions_, candidate, 0, s1, false);
  };

  // xi = 0 is always feasible and seeds the search; grid points must beat it strictly.
  std::vector<Eigen::VectorXd> xi(blocks, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)));
  evaluate(xi);
  ThetaTable best = candidate;

  std::vector<int> digits(coords, 0);
  do {
    bool feasible = true;
    for (std::size_t b = 0; b < blocks && feasible; ++b) {
      for (std::size_t j = 0; j < d; ++j) xi[b][static_cast<Eigen::Index>(j)] = setup[b].axis[digits[b * d + j]];
      const double sa = setup[b].sqrt_alpha;
      feasible = xi[b].dot(ridges_[b].lam() * xi[b]) <= sa * sa * (1.0 + 1e-12);
    }
    if (!feasible) continue;
    evaluate(xi);
    if (candidate.objective > best.objective) best = candidate;
  } while (advance(digits, g));

  for (std::size_t b = 0; b < blocks; ++b) {
    ThetaBlock& block = best.blocks[b];
    block.xi_norm = ridges_[b].design_norm(block.theta_bar - block.theta_hat);
  }
  return best;
}

} // namespace cinderella
