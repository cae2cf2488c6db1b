#pragma once

// Seeding and sampling helpers. Draws are built from the raw 64-bit output of
// std::mt19937_64 so sequences are identical across standard libraries (the
// std:: distributions are implementation-defined).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ebrake {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based child seed: the same (master, stream, index) always maps to
/// the same value, independent of how many other draws happened.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
}

namespace streams {
inline constexpr std::uint64_t kScenario = 0x5343454e;   // scenario sampling
inline constexpr std::uint64_t kInit = 0x494e4954;       // network init
inline constexpr std::uint64_t kExplore = 0x45585052;    // action noise
inline constexpr std::uint64_t kMinibatch = 0x4d494e49;  // shuffles, replay draws
inline constexpr std::uint64_t kEval = 0x4556414c;       // learning-curve episodes
inline constexpr std::uint64_t kSplit = 0x53504c54;      // distance splits
}  // namespace streams

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ebrake
