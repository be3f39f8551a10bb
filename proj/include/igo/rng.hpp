#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace igo {

/// Counter-based splittable random stream.
///
/// A stream is identified by a 64-bit key; output i is the splitmix64
/// finalizer applied to key + i*gamma. child(k) derives an independent
/// substream without advancing the parent, so every (trial, iteration,
/// sample) tuple can own its own stream and the order in which batches are
/// evaluated cannot perturb any draw.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ kGamma)) {}

  /// Independent substream for the given index; does not advance this stream.
  [[nodiscard]] Rng child(std::uint64_t index) const {
    return Rng(combine(key_, index), 0);
  }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; always consumes exactly two draws.
  double gaussian() {
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

  Rng(std::uint64_t key, std::uint64_t counter)
      : key_(key), counter_(counter) {}

  // splitmix64 finalizer
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t combine(std::uint64_t key,
                                         std::uint64_t index) {
    return mix(key ^ (mix(index + kGamma) + (key << 6) + (key >> 2)));
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// FNV-1a over bytes; used to fold textual labels into seed derivations.
constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace igo
