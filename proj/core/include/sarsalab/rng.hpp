#pragma once

#include <cmath>
#include <cstdint>
#include <span>

#include "sarsalab/errors.hpp"

namespace sarsalab {

/// SplitMix64 finalizer. Used both as a seed expander and to derive
/// per-replication child seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Child seed for replication `index` under `master`. Distinct indices give
/// statistically independent streams; the map is pure, so sweeps are
/// reproducible regardless of worker scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s = master ^ (0x9E3779B97F4A7C15ULL * (index + 1));
  return a ^ splitmix64(s);
}

/// xoshiro256++ generator with explicit, platform-independent output
/// conversions. Copyable: cloning an Rng clones the stream position, which
/// the coupling diagnostic relies on for common-random-number pairing.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Index sampled from an (approximately normalized) probability row.
  /// Consumes exactly one uniform.
  int categorical(std::span<const double> probs) {
    if (probs.empty()) throw ParameterError("categorical: empty distribution");
    const double u = uniform();
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      cum += probs[i];
      if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  /// Uniform integer in [0, n). Consumes one uniform.
  int uniform_int(int n) {
    if (n <= 0) throw ParameterError("uniform_int: n must be positive");
    const int k = static_cast<int>(uniform() * static_cast<double>(n));
    return k >= n ? n - 1 : k;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace sarsalab
