#include "lago/rng.hpp"

#include <cmath>

#include "lago/errors.hpp"
#include "lago/stats.hpp"

namespace lago {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t substream_key(std::uint64_t seed, std::uint64_t replicate,
                            std::uint64_t stage, StreamPurpose purpose) {
  std::uint64_t k = mix64(seed);
  k = mix64(k ^ replicate);
  k = mix64(k ^ stage);
  k = mix64(k ^ static_cast<std::uint64_t>(purpose));
  return k;
}

SubstreamRng::SubstreamRng(std::uint64_t seed, std::uint64_t replicate,
                           std::uint64_t stage, StreamPurpose purpose)
    : engine_(substream_key(seed, replicate, stage, purpose)) {}

std::uint64_t SubstreamRng::next_u64() { return engine_(); }

double SubstreamRng::uniform() {
  const std::uint64_t x = engine_();
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

double SubstreamRng::normal() { return stats::normal_quantile(uniform()); }

std::vector<int> SubstreamRng::permutation(int n) {
  if (n < 0) throw ValidationError("permutation requires n >= 0");
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    // floor(u*(i+1)) has O(2^-53) selection bias, negligible and portable.
    int j = static_cast<int>(uniform() * static_cast<double>(i + 1));
    if (j > i) j = i;
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  return idx;
}

}  // namespace lago
