#pragma once

#include <cstdint>
#include <random>

namespace aerate {

using Rng = std::mt19937_64;

// SplitMix64 finalizer, used to derive well-separated substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(seed ^ splitmix64(stream + 1));
}

/// Independent random substreams for one trial.
///
/// Covariates, outcome noise, assignment uniforms and coefficient draws each
/// get their own engine. Every round consumes the same number of draws from
/// each stream regardless of design, so two designs run with the same seed
/// see the same environment (matched-seed comparisons).
struct TrialStreams {
  Rng covariates;
  Rng noise;
  Rng assignment;
  Rng coefficients;

  explicit TrialStreams(std::uint64_t seed)
      : covariates(substream_seed(seed, 0)),
        noise(substream_seed(seed, 1)),
        assignment(substream_seed(seed, 2)),
        coefficients(substream_seed(seed, 3)) {}
};

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

inline double uniform01(Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

}  // namespace aerate
