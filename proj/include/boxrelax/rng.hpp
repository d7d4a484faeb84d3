#ifndef BOXRELAX_RNG_HPP_
#define BOXRELAX_RNG_HPP_

#include <cmath>
#include <cstdint>

// Deterministic random number generation for reproducible Monte Carlo
// campaigns. The generator family and the uniform->Gaussian transform are
// part of the output contract: the same (master_seed, trial_index) must
// reproduce the same stream on every run, so neither may change.
//
//   * substream seeds: SplitMix64 finalizer over master_seed advanced by
//     (index + 1) golden-gamma steps (Steele/Lea/Vigna splittable scheme).
//   * stream generator: xoshiro256++ (Blackman & Vigna, 2019), state
//     expanded from the 64-bit substream seed with SplitMix64.
//   * Gaussian variates: Marsaglia polar method over [0,1) uniforms taken
//     from the top 53 bits, with the spare value cached in-stream.

namespace boxrelax::rng {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

/// SplitMix64 output (finalizing) function.
inline std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seed of the index-th substream of a master seed. Pure 64-bit integer
/// arithmetic, identical on every platform.
inline std::uint64_t substream_seed(std::uint64_t master_seed,
                                    std::uint64_t index) noexcept {
  return mix64(master_seed + (index + 1) * kGoldenGamma);
}

class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) noexcept {
    std::uint64_t s = seed;
    for (auto& word : state_) {
      s += kGoldenGamma;
      word = mix64(s);
    }
  }

  std::uint64_t next() noexcept {
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

  /// Uniform double in [0, 1), 53 random bits.
  double uniform01() noexcept { return (next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, 2^bits); bits in [1, 64].
  std::uint64_t top_bits(int bits) noexcept { return next() >> (64 - bits); }

  /// Standard normal variate via the Marsaglia polar method. Variates are
  /// produced in pairs; the second of each pair is cached in the stream.
  double gaussian() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace boxrelax::rng

#endif  // BOXRELAX_RNG_HPP_
