#include "swarm/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace swarm {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_substream(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t acc = 0x243F6A8885A308D3ULL;
  for (auto p : parts) acc = splitmix64(acc ^ splitmix64(p));
  return acc;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t substream)
    : seed_(seed),
      substream_(substream),
      engine_(splitmix64(seed ^ splitmix64(substream + 0x632BE59BD9B4E019ULL))) {}

RngStream::RngStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t a,
                     std::uint64_t b)
    : RngStream(seed, derive_substream({static_cast<std::uint64_t>(purpose), a, b})) {}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RngStream::normal(double mean, double stddev) {
  // 1 - u lies in (0, 1], keeping the log finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * radius * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::index(std::uint64_t n) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - (max % n);
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return draw % n;
}

}  // namespace swarm
