#pragma once

#include <cstdint>
#include <random>

namespace cinderella {

using Rng = std::mt19937_64;

enum class StreamPurpose : std::uint64_t {
  InitialState = 1,
  Environment = 2,
  Planner = 3,
  Oracle = 4,
  Check = 5,
};

/// Identifies an independent random stream. Streams never overlap across
/// purposes, so changing how one consumer draws numbers leaves every other
/// consumer's draws untouched.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t run = 0;
  std::uint64_t episode = 0;
  std::uint64_t step = 0;
  StreamPurpose purpose = StreamPurpose::Environment;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

Rng make_stream(const StreamKey& key);

/// Gaussian draw with standard deviation sigma, rejected outside +-bound*sigma.
double truncated_normal(Rng& rng, double sigma, double bound = 4.0);

double uniform(Rng& rng, double lo, double hi);

} // namespace cinderella
