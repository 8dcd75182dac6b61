#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

namespace cinderella {

/// Index of a cell in a Partition, always in [0, Partition::size()).
struct RegionIndex {
  std::size_t value = 0;

  friend bool operator==(RegionIndex, RegionIndex) = default;
};

/// Regular grid epsilon-cover of the cube [-1,1]^dim.
///
/// The cube is split into m = ceil(1/epsilon) equal cells per axis. Cell
/// centers sit at -1 + (2i-1)/m (i = 1..m) along each axis and are enumerated
/// in row-major order (the first coordinate varies slowest). Every point of
/// the cube lies within infinity-distance 1/m <= epsilon of its center.
/// Points on a shared cell face belong to the cell with the smaller index,
/// so each point is assigned to exactly one region.
class Partition {
public:
  Partition(int dim, double epsilon);

  int dim() const noexcept { return dim_; }
  double epsilon() const noexcept { return epsilon_; }
  int cells_per_axis() const noexcept { return cells_per_axis_; }
  /// Half-width of every cell, 1/m.
  double effective_radius() const noexcept { return 1.0 / cells_per_axis_; }
  std::size_t size() const noexcept { return size_; }

  /// Center of region `n`, written into `out` (length dim).
  void center(RegionIndex n, std::span<double> out) const;
  std::vector<double> center(RegionIndex n) const;

  /// Region containing `z`. Throws OutOfDomain when a coordinate leaves [-1,1].
  RegionIndex assign(std::span<const double> z) const;

  /// Same as assign() without the domain check; coordinates are clamped.
  RegionIndex assign_unchecked(std::span<const double> z) const noexcept;

  nlohmann::json to_json() const;
  static Partition from_json(const nlohmann::json& j);

private:
  int dim_;
  double epsilon_;
  int cells_per_axis_;
  std::size_t size_;
};

/// Tensor lattice of `points` values per axis on [-1,1]^dim, endpoints
/// included (a single point per axis sits at 0). Points are stored row-major.
class Lattice {
public:
  Lattice(int dim, int points_per_axis);

  int dim() const noexcept { return dim_; }
  int points_per_axis() const noexcept { return points_; }
  std::size_t size() const noexcept { return size_; }
  double spacing() const noexcept { return points_ > 1 ? 2.0 / (points_ - 1) : 2.0; }
  double axis_value(int i) const noexcept { return points_ > 1 ? -1.0 + i * spacing() : 0.0; }

  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }

private:
  int dim_;
  int points_;
  std::size_t size_;
  std::vector<double> coords_;
};

/// Same as constructing a Partition; mirrors the free-function API.
Partition build_partition(int dim, double epsilon);

RegionIndex assign_region(const Partition& p, std::span<const double> z);

/// Cover radius balancing approximation and estimation error:
/// min(1, K^(-1/(2d + 2 nu))).
double auto_epsilon(long long episodes, int dim, double nu);

} // namespace cinderella
