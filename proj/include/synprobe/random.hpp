#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "synprobe/text.hpp"

namespace synprobe {

// Portable draws: std::uniform_int_distribution output differs between
// standard libraries, so indices come from rejection sampling on mt19937_64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::string_view stream) : engine_(derive_seed(seed, stream)) {}

  static std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) noexcept {
    std::uint64_t h = fnv1a64(stream, 14695981039346656037ull ^ seed);
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
    return h;
  }

  // Uniform in [0, n); n > 0.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace synprobe
