#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace lago {

// Purpose tags for the per-replicate random substreams. Each (seed, replicate,
// stage, purpose) tuple owns an independent stream, so replicates can run in
// any order or concurrently with identical results.
enum class StreamPurpose : std::uint64_t {
  centre_z = 1,
  arms = 2,
  intervention_noise = 3,
  outcome_noise = 4,
};

// Stateless 64-bit finalizer (splitmix64 output function).
std::uint64_t mix64(std::uint64_t z);

// Derives the substream key by chaining the finalizer over the tuple.
std::uint64_t substream_key(std::uint64_t seed, std::uint64_t replicate,
                            std::uint64_t stage, StreamPurpose purpose);

// Deterministic random stream: mt19937_64 seeded from a substream key, with
// portable uniform/normal transforms (no platform-dependent distributions).
class SubstreamRng {
 public:
  SubstreamRng(std::uint64_t seed, std::uint64_t replicate, std::uint64_t stage,
               StreamPurpose purpose);

  std::uint64_t next_u64();

  // Uniform on the open interval (0,1): 53-bit mantissa, never 0 or 1.
  double uniform();

  // Standard normal via the inverse-CDF transform.
  double normal();

  // Uniformly random permutation of 0..n-1 (Fisher-Yates driven by uniform()).
  std::vector<int> permutation(int n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace lago
