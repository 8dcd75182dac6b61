#include "cinderella/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "cinderella/error.hpp"

namespace cinderella {

namespace {

// Cell of coordinate x along one axis. A point on the face between cells
// j-1 and j goes to j-1, which yields the smallest row-major index overall.
int axis_cell(double x, int m) noexcept {
  const double t = (x + 1.0) * 0.5 * m;
  const int cell = static_cast<int>(std::ceil(t)) - 1;
  return std::clamp(cell, 0, m - 1);
}

} // namespace

const char* to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::InvalidEpsilon: return "invalid-epsilon";
  case ErrorCode::DimensionZero: return "dimension-zero";
  case ErrorCode::OutOfDomain: return "out-of-domain";
  case ErrorCode::NonPositiveNu: return "non-positive-nu";
  case ErrorCode::NonPositiveLambda: return "non-positive-lambda";
  case ErrorCode::NonFiniteInput: return "non-finite-input";
  case ErrorCode::BetaOutOfRange: return "beta-out-of-range";
  case ErrorCode::InvalidTheta: return "invalid-theta";
  case ErrorCode::InvalidParameter: return "invalid-parameter";
  case ErrorCode::InvalidReward: return "invalid-reward";
  case ErrorCode::PolicyOutOfRange: return "policy-out-of-range";
  case ErrorCode::InstanceTooLarge: return "instance-too-large";
  case ErrorCode::DensityUnavailable: return "density-unavailable";
  case ErrorCode::ResolutionTooSmall: return "resolution-too-small";
  case ErrorCode::OracleTooLarge: return "oracle-too-large";
  case ErrorCode::ConfigInvalid: return "config-invalid";
  }
  return "unknown";
}

Partition::Partition(int dim, double epsilon) : dim_(dim), epsilon_(epsilon) {
  if (dim < 1) throw Error(ErrorCode::DimensionZero, "partition dimension must be >= 1");
  if (!(epsilon > 0.0) || epsilon > 1.0) {
    throw Error(ErrorCode::InvalidEpsilon, "epsilon must lie in (0, 1]");
  }
  // The slack keeps eps = 1/m (rounded) from producing m + 1 cells.
  cells_per_axis_ = static_cast<int>(std::ceil(1.0 / epsilon - 1e-9));
  size_ = 1;
  for (int i = 0; i < dim; ++i) size_ *= static_cast<std::size_t>(cells_per_axis_);
}


void Partition::center(RegionIndex n, std::span<double> out) const {
  const int m = cells_per_axis_;
  std::size_t rest = n.value;
  for (int axis = dim_ - 1; axis >= 0; --axis) {
    const auto i = static_cast<int>(rest % m);
    rest /= m;
    out[axis] = -1.0 + (2.0 * i + 1.0) / m;
  }
}

std::vector<double> Partition::center(RegionIndex n) const {
  std::vector<double> c(dim_);
  center(n, c);
  return c;
}

RegionIndex Partition::assign_unchecked(std::span<const double> z) const noexcept {
  std::size_t index = 0;
  for (int axis = 0; axis < dim_; ++axis) {
    index = index * cells_per_axis_ + axis_cell(z[axis], cells_per_axis_);
  }
  return RegionIndex{index};
}

RegionIndex Partition::assign(std::span<const double> z) const {
  if (static_cast<int>(z.size()) != dim_) {
    throw Error(ErrorCode::OutOfDomain, "point dimension does not match partition");
  }
  for (double x : z) {
    if (!(x >= -1.0 && x <= 1.0)) throw Error(ErrorCode::OutOfDomain, "coordinate outside [-1, 1]");
  }
  return assign_unchecked(z);
}

nlohmann::json Partition::to_json() const {
  return {{"dim", dim_}, {"epsilon", epsilon_}, {"cells_per_axis", cells_per_axis_}};
}

Partition Partition::from_json(const nlohmann::json& j) {
  Partition p(j.at("dim").get<int>(), j.at("epsilon").get<double>());
  if (j.contains("cells_per_axis") && j.at("cells_per_axis").get<int>() != p.cells_per_axis()) {
    throw Error(ErrorCode::InvalidEpsilon, "cells_per_axis inconsistent with epsilon");
  }
  return p;
}

Lattice::Lattice(int dim, int points_per_axis) : dim_(dim), points_(points_per_axis) {
  if (dim < 1) throw Error(ErrorCode::DimensionZero, "lattice dimension must be >= 1");
  if (points_per_axis < 1) throw Error(ErrorCode::ResolutionTooSmall, "lattice needs >= 1 point per axis");
  size_ = 1;
  for (int i = 0; i < dim; ++i) size_ *= static_cast<std::size_t>(points_per_axis);
  coords_.resize(size_ * dim);
  for (std::size_t n = 0; n < size_; ++n) {
    std::size_t rest = n;
    for (int axis = dim - 1; axis >= 0; --axis) {
      coords_[n * dim + axis] = axis_value(static_cast<int>(rest % points_per_axis));
      rest /= points_per_axis;
    }
  }
}

Partition build_partition(int dim, double epsilon) { return Partition(dim, epsilon); }

RegionIndex assign_region(const Partition& p, std::span<const double> z) { return p.assign(z); }

double auto_epsilon(long long episodes, int dim, double nu) {
  if (!(nu > 0.0)) throw Error(ErrorCode::NonPositiveNu, "nu must be positive");
  if (episodes < 1) throw Error(ErrorCode::InvalidParameter, "episode count must be >= 1");
  if (dim < 1) throw Error(ErrorCode::DimensionZero, "dimension must be >= 1");
  const double eps = std::pow(static_cast<double>(episodes), -1.0 / (2.0 * dim + 2.0 * nu));
  return std::min(1.0, eps);
}

} // namespace cinderella
