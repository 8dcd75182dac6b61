#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace cinderella {

/// Ridge regression state of one (step, region) pair.
///
/// Keeps the design matrix lam = lambda I + sum phi phi', its inverse (updated
/// by Sherman-Morrison and refactorized every kReinvertEvery updates), the
/// target accumulator bvec = sum phi * target, and the visit count.
class RegionRidgeState {
public:
  static constexpr std::size_t kReinvertEvery = 512;

  RegionRidgeState(std::size_t dim, double lambda);

  /// Adds phi phi' to the design, phi * target to bvec, and bumps the count.
  void update(std::span<const double> phi, double target);
  /// Design-only update: the caller rebuilds bvec itself when targets move.
  void update_design(std::span<const double> phi);

  void clear_targets() { bvec_.setZero(); }
  void accumulate_target(std::span<const double> phi, double target);

  Eigen::VectorXd theta_hat() const { return lam_inv_ * bvec_; }
  /// sqrt(phi' lam^-1 phi).
  double inv_norm(std::span<const double> phi) const;
  /// sqrt(x' lam x).
  double design_norm(const Eigen::VectorXd& x) const;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(lam_.rows()); }
  double lambda() const noexcept { return lambda_; }
  std::size_t count() const noexcept { return count_; }
  const Eigen::MatrixXd& lam() const noexcept { return lam_; }
  const Eigen::MatrixXd& lam_inv() const noexcept { return lam_inv_; }
  const Eigen::VectorXd& bvec() const noexcept { return bvec_; }

  /// Recomputes lam_inv from lam by Cholesky.
  void refresh_inverse();

private:
  double lambda_;
  Eigen::MatrixXd lam_;
  Eigen::MatrixXd lam_inv_;
  Eigen::VectorXd bvec_;
  Eigen::VectorXd scratch_;
  std::size_t count_ = 0;
};

RegionRidgeState ridge_init(std::size_t dim, double lambda);
void ridge_update(RegionRidgeState& state, std::span<const double> phi, double target);
Eigen::VectorXd theta_hat(const RegionRidgeState& state);
double mahalanobis_inv_norm(const RegionRidgeState& state, std::span<const double> phi);

} // namespace cinderella
