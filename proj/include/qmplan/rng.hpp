#pragma once

#include <cmath>
#include <cstdint>
#include <random>

// Seeded randomness with a fixed, platform-independent algorithm.
//
// Every random decision in the library flows through Rng, which wraps
// std::mt19937_64 (exactly specified by the standard, so sequences are
// identical across compilers and platforms). Bounded draws avoid
// std::uniform_int_distribution on purpose: its mapping from engine output
// to values is implementation-defined and would break byte-reproducibility
// of datasets and rollouts across standard libraries.
//
// Independent streams are derived by hashing a master seed with stream
// indices (splitmix64), e.g. one stream per trajectory, per evaluation
// pair, or per rollout purpose (action sampling vs. waypoint sampling).

namespace qmplan {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(~stream));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b) {
  return derive_seed(derive_seed(master, a), b);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return eng_(); }

  // Unbiased draw from [0, n) by rejection sampling; n must be positive.
  std::size_t uniform_index(std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
    std::uint64_t x = eng_();
    while (x >= limit) x = eng_();
    return static_cast<std::size_t>(x % bound);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform_unit() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (polar form would consume a variable
  // number of draws; the trig form keeps the stream layout predictable).
  double normal() {
    double u1 = uniform_unit();
    double u2 = uniform_unit();
    while (u1 == 0.0) u1 = uniform_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace qmplan
