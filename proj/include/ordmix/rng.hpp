#pragma once

// Deterministic random streams. Every stochastic task (a unit's box-probability
// points, a (unit, cluster) Gibbs chain, a restart's initialization) owns a
// stream whose seed is a hash of the master seed and the task's key, so results
// do not depend on scheduling or thread count.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ordmix {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the substream identified by `keys` under `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

// Substream tags.
enum class StreamTag : std::uint64_t {
  kBoxProbability = 1,
  kGibbs = 2,
  kInit = 3,
  kReseed = 4,
  kSimulate = 5,
  kSimulateUnit = 6,
};

class Stream {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    std::uniform_int_distribution<std::uint64_t> d(0, n - 1);
    return d(engine_);
  }

  double normal();

  result_type operator()() { return engine_(); }
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }

 private:
  std::mt19937_64 engine_;
};

inline Stream make_stream(std::uint64_t master, StreamTag tag, std::initializer_list<std::uint64_t> keys = {}) {
  std::uint64_t h = derive_seed(master, {static_cast<std::uint64_t>(tag)});
  for (std::uint64_t k : keys) h = derive_seed(h, {k});
  return Stream(h);
}

}  // namespace ordmix

#include "ordmix/normal.hpp"

namespace ordmix {
inline double Stream::normal() { return norm_quantile(uniform()); }
}  // namespace ordmix
