#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace swarm {

/// 64-bit finalizer used to scatter seeds and substream ids.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Folds a list of integers (purpose tag, epoch, episode, ...) into one id.
std::uint64_t derive_substream(std::initializer_list<std::uint64_t> parts) noexcept;

/// Purpose tags for substreams. Values are part of the reproducibility
/// contract; never renumber.
enum class StreamPurpose : std::uint64_t {
  kBaseStations = 1,
  kTargets = 2,
  kUavs = 3,
  kEnvironment = 4,
  kRuntimeInit = 5,
  kActionSampling = 6,
  kWeightInit = 7,
};

/// Seeded generator owned by exactly one consumer.
///
/// The engine is mt19937_64, whose output sequence is fixed by the standard.
/// The distribution transforms are implemented here instead of using
/// <random>'s distributions, which are implementation-defined.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t substream);
  RngStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t a = 0,
            std::uint64_t b = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  /// Box-Muller; consumes exactly two uniforms per call.
  double normal(double mean = 0.0, double stddev = 1.0);

  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t index(std::uint64_t n);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t substream() const noexcept { return substream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t substream_;
  std::mt19937_64 engine_;
};

}  // namespace swarm
