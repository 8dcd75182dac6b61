#include "cinderella/regression.hpp"

#include <cmath>

#include "cinderella/error.hpp"

namespace cinderella {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

void check_phi(std::span<const double> phi, std::size_t dim) {
  if (phi.size() != dim) throw Error(ErrorCode::InvalidParameter, "feature length does not match ridge dimension");
  for (double x : phi) {
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteInput, "non-finite feature");
  }
}

} // namespace

RegionRidgeState::RegionRidgeState(std::size_t dim, double lambda) : lambda_(lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::NonPositiveLambda, "lambda must be positive");
  if (dim == 0) throw Error(ErrorCode::DimensionZero, "ridge dimension must be >= 1");
  const auto n = static_cast<Eigen::Index>(dim);
  lam_ = lambda * Eigen::MatrixXd::Identity(n, n);
  lam_inv_ = Eigen::MatrixXd::Identity(n, n) / lambda;
  bvec_ = Eigen::VectorXd::Zero(n);
  scratch_ = Eigen::VectorXd::Zero(n);
}

void RegionRidgeState::update_design(std::span<const double> phi) {
  check_phi(phi, dim());
  const auto x = as_vector(phi);
  lam_.noalias() += x * x.transpose();
  ++count_;
  if (count_ % kReinvertEvery == 0) {
    refresh_inverse();
    return;
  }
  scratch_.noalias() = lam_inv_ * x;
  const double denom = 1.0 + x.dot(scratch_);
  lam_inv_.noalias() -= (scratch_ * scratch_.transpose()) / denom;
}

void RegionRidgeState::update(std::span<const double> phi, double target) {
  if (!std::isfinite(target)) throw Error(ErrorCode::NonFiniteInput, "non-finite regression target");
  update_design(phi);
  bvec_.noalias() += target * as_vector(phi);
}

void RegionRidgeState::accumulate_target(std::span<const double> phi, double target) {
  bvec_.noalias() += target * as_vector(phi);
}

double RegionRidgeState::inv_norm(std::span<const double> phi) const {
  // Hand-rolled so the hot planning loop does not allocate.
  const auto n = static_cast<Eigen::Index>(phi.size());
  double q = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double xj = phi[j];
    if (xj == 0.0) continue;
    double col = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) col += lam_inv_(i, j) * phi[i];
    q += xj * col;
  }
  return q > 0.0 ? std::sqrt(q) : 0.0;
}

double RegionRidgeState::design_norm(const Eigen::VectorXd& x) const {
  const double q = x.dot(lam_ * x);
  return q > 0.0 ? std::sqrt(q) : 0.0;
}

void RegionRidgeState::refresh_inverse() {
  const auto n = lam_.rows();
  lam_inv_ = lam_.llt().solve(Eigen::MatrixXd::Identity(n, n));
  lam_inv_ = 0.5 * (lam_inv_ + lam_inv_.transpose()).eval();
}

RegionRidgeState ridge_init(std::size_t dim, double lambda) { return RegionRidgeState(dim, lambda); }

void ridge_update(RegionRidgeState& state, std::span<const double> phi, double target) {
  state.update(phi, target);
}

Eigen::VectorXd theta_hat(const RegionRidgeState& state) { return state.theta_hat(); }

double mahalanobis_inv_norm(const RegionRidgeState& state, std::span<const double> phi) {
  return state.inv_norm(phi);
}

} // namespace cinderella
