#include "cinderella/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cinderella/error.hpp"

namespace cinderella {

namespace {

// Appends all tuples of `dim` coordinates summing to exactly `total`,
// first coordinate descending.
void append_degree(int dim, int total, std::vector<int>& prefix, std::vector<int>& flat) {
  const int axis = static_cast<int>(prefix.size());
  if (axis == dim - 1) {
    flat.insert(flat.end(), prefix.begin(), prefix.end());
    flat.push_back(total);
    return;
  }
  for (int v = total; v >= 0; --v) {
    prefix.push_back(v);
    append_degree(dim, total - v, prefix, flat);
    prefix.pop_back();
  }
}

} // namespace

MultiIndexSet::MultiIndexSet(int dim, int degree) : dim_(dim), degree_(degree) {
  if (dim < 1) throw Error(ErrorCode::DimensionZero, "multi-index dimension must be >= 1");
  if (degree < 0) throw Error(ErrorCode::InvalidParameter, "degree must be >= 0");
  std::vector<int> prefix;
  prefix.reserve(dim);
  for (int total = 0; total <= degree; ++total) append_degree(dim, total, prefix, flat_);
}

MultiIndexSet enumerate_multi_indices(int dim, int degree) { return MultiIndexSet(dim, degree); }

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    // result * (n - k + i) is divisible by i at every step.
    if (result > std::numeric_limits<std::size_t>::max() / (n - k + i)) {
      throw Error(ErrorCode::InvalidParameter, "binomial overflow");
    }
    result = result * (n - k + i) / i;
  }
  return result;
}

int nu_star(double nu) {
  if (!(nu > 0.0)) throw Error(ErrorCode::NonPositiveNu, "nu must be positive");
  return static_cast<int>(std::ceil(nu - 1.0));
}

TaylorFeatureMap::TaylorFeatureMap(Partition partition, int degree, bool normalize)
  : partition_(std::move(partition)), index_set_(partition_.dim(), degree), normalize_(normalize) {}

double TaylorFeatureMap::raw_norm_bound() const {
  return 1.0 + 2.0 * std::sqrt(static_cast<double>(feature_dim()));
}

double TaylorFeatureMap::norm_bound() const { return normalize_ ? 1.0 : raw_norm_bound(); }

void TaylorFeatureMap::evaluate(std::span<const double> z, std::span<double> out) const {
  const int d = partition_.dim();
  const int m = partition_.cells_per_axis();
  // Offsets from the center, reconstructed per axis without materializing the center.
  double offset[16];
  double* delta = offset;
  std::vector<double> heap;
  if (d > 16) {
    heap.resize(d);
    delta = heap.data();
  }
  const RegionIndex n = partition_.assign_unchecked(z);
  std::size_t rest = n.value;
  for (int axis = d - 1; axis >= 0; --axis) {
    const auto i = static_cast<int>(rest % m);
    rest /= m;
    delta[axis] = z[axis] - (-1.0 + (2.0 * i + 1.0) / m);
  }
  const double scale = normalize_ ? 1.0 / raw_norm_bound() : 1.0;
  for (std::size_t j = 0; j < index_set_.size(); ++j) {
    const auto alpha = index_set_[j];
    double value = scale;
    for (int axis = 0; axis < d; ++axis) {
      for (int p = 0; p < alpha[axis]; ++p) value *= delta[axis];
    }
    out[j] = value;
  }
}

ZeroFeatureMap::ZeroFeatureMap(int input_dim, std::size_t feature_dim)
  : partition_(input_dim, 1.0), feature_dim_(feature_dim) {}

void ZeroFeatureMap::evaluate(std::span<const double>, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
}

std::vector<double> taylor_features(const LocalFeatureMap& map, std::span<const double> z) {
  map.partition().assign(z); // domain check
  std::vector<double> phi(map.feature_dim());
  map.evaluate(z, phi);
  return phi;
}

std::vector<double> extend_features(const LocalFeatureMap& map, std::span<const double> z) {
  const RegionIndex n = map.partition().assign(z);
  const std::size_t d = map.feature_dim();
  std::vector<double> extended(map.num_regions() * d, 0.0);
  map.evaluate(z, std::span<double>(extended).subspan(n.value * d, d));
  return extended;
}

std::vector<double> taylor_coefficients(const MultiIndexSet& indices, const DerivativeOracle& derivative,
                                        std::span<const double> center) {
  std::vector<double> theta(indices.size());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const auto alpha = indices[j];
    double factorial = 1.0;
    for (int a : alpha) {
      for (int p = 2; p <= a; ++p) factorial *= p;
    }
    theta[j] = derivative(alpha, center) / factorial;
  }
  return theta;
}

} // namespace cinderella
