#include "cinderella/rng.hpp"

#include <cmath>

namespace cinderella {

std::uint64_t mix64(std::uint64_t x) noexcept {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng make_stream(const StreamKey& key) {
  std::uint64_t h = mix64(key.seed);
  h = mix64(h ^ key.run);
  h = mix64(h ^ key.episode);
  h = mix64(h ^ key.step);
  h = mix64(h ^ static_cast<std::uint64_t>(key.purpose));
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

double truncated_normal(Rng& rng, double sigma, double bound) {
  if (sigma <= 0.0) return 0.0;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    const double x = normal(rng);
    if (std::abs(x) <= bound) return sigma * x;
  }
}

double uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(rng);
}

} // namespace cinderella
