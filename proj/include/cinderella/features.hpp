#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "cinderella/geometry.hpp"

namespace cinderella {

/// All d-tuples of nonnegative integers with coordinate sum <= degree.
///
/// Ordered by total degree, and within a degree lexicographically with the
/// first coordinate descending: for d = 2, degree 2 this gives
/// (0,0) (1,0) (0,1) (2,0) (1,1) (0,2). The zero index is always first.
class MultiIndexSet {
public:
  MultiIndexSet(int dim, int degree);

  int dim() const noexcept { return dim_; }
  int degree() const noexcept { return degree_; }
  std::size_t size() const noexcept { return flat_.size() / dim_; }

  std::span<const int> operator[](std::size_t i) const {
    return {flat_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }

private:
  int dim_;
  int degree_;
  std::vector<int> flat_;
};

MultiIndexSet enumerate_multi_indices(int dim, int degree);

/// Exact binomial coefficient; throws on overflow.
std::size_t binomial(std::size_t n, std::size_t k);

/// Number of derivatives a C^nu function is guaranteed to have: ceil(nu - 1).
int nu_star(double nu);

/// Feature map that is linear in a per-region parameter: Q(z) = phi(z)' theta_{rho(z)}.
class LocalFeatureMap {
public:
  virtual ~LocalFeatureMap() = default;

  virtual const Partition& partition() const = 0;
  virtual std::size_t feature_dim() const = 0;
  /// Writes phi(z) into `out` (length feature_dim()). No domain check.
  virtual void evaluate(std::span<const double> z, std::span<double> out) const = 0;
  /// Upper bound on ||phi(z)||_2 over the domain (L_phi).
  virtual double norm_bound() const = 0;

  RegionIndex region(std::span<const double> z) const { return partition().assign_unchecked(z); }
  std::size_t num_regions() const { return partition().size(); }
  int input_dim() const { return partition().dim(); }
};

/// Piecewise Taylor monomials (z - c)^alpha centered at the cell center c of
/// the region containing z, for every |alpha| <= degree.
class TaylorFeatureMap final : public LocalFeatureMap {
public:
  TaylorFeatureMap(Partition partition, int degree, bool normalize = false);

  const Partition& partition() const override { return partition_; }
  std::size_t feature_dim() const override { return index_set_.size(); }
  void evaluate(std::span<const double> z, std::span<double> out) const override;
  double norm_bound() const override;

  const MultiIndexSet& index_set() const noexcept { return index_set_; }
  bool normalized() const noexcept { return normalize_; }
  /// 1 + 2 sqrt(d) with d the feature dimension; the raw map never exceeds it.
  double raw_norm_bound() const;

private:
  Partition partition_;
  MultiIndexSet index_set_;
  bool normalize_;
};

/// phi = 0 on a single region; every Q in its class is identically zero.
class ZeroFeatureMap final : public LocalFeatureMap {
public:
  explicit ZeroFeatureMap(int input_dim, std::size_t feature_dim = 1);

  const Partition& partition() const override { return partition_; }
  std::size_t feature_dim() const override { return feature_dim_; }
  void evaluate(std::span<const double> z, std::span<double> out) const override;
  double norm_bound() const override { return 0.0; }

private:
  Partition partition_;
  std::size_t feature_dim_;
};

/// phi(z) with a domain check on z.
std::vector<double> taylor_features(const LocalFeatureMap& map, std::span<const double> z);

/// Block vector of length N * d: block rho(z) holds phi(z), every other block is zero.
std::vector<double> extend_features(const LocalFeatureMap& map, std::span<const double> z);

/// Returns D^alpha f at a point.
using DerivativeOracle = std::function<double(std::span<const int> alpha, std::span<const double> at)>;

/// Coefficients D^alpha f(c) / alpha! that turn the monomial features at
/// center c into the Taylor polynomial of f.
std::vector<double> taylor_coefficients(const MultiIndexSet& indices, const DerivativeOracle& derivative,
                                        std::span<const double> center);

} // namespace cinderella
