#pragma once

#include <cstdint>

namespace poseprompt {

/// Counter-based SplitMix64 stream. Output i is mix(key + (i+1) * gamma),
/// so a stream is fully described by (key, counter) and sub-streams can be
/// split off without touching the parent.
class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  constexpr CounterRng() = default;
  constexpr explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  /// Stream for one instance: independent of processing order.
  static CounterRng for_instance(std::uint64_t seed, std::int64_t image_id,
                                 std::int64_t instance_id) {
    std::uint64_t k = mix(seed ^ 0x6a09e667f3bcc908ULL);
    k = mix(k ^ static_cast<std::uint64_t>(image_id));
    k = mix(k ^ static_cast<std::uint64_t>(instance_id) ^ 0xbb67ae8584caa73bULL);
    return CounterRng(k);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  CounterRng split(std::uint64_t stream) const {
    return CounterRng(mix(key_ ^ mix(stream + kGamma)));
  }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

  /// Uniform in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n) by 128-bit multiply-high.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  bool operator==(const CounterRng&) const = default;

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace poseprompt
