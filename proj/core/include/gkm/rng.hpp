#pragma once

#include <cstdint>

namespace gkm {

// Counter-based generator: draw k of a stream is a pure function of
// (key, k), so edge draws can be evaluated in any order or in parallel.
// The mixing function is the SplitMix64 finalizer.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return mix(key_ + (counter + 1) * kGolden);
  }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t key() const { return key_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;
  std::uint64_t key_;
};

/// Independent stream key for one (seed, graph size, trial) triple.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t n, std::uint64_t trial) {
  std::uint64_t k = CounterRng::mix(seed + 0x9e3779b97f4a7c15ull);
  k = CounterRng::mix(k ^ (n * 0xd1b54a32d192ed03ull));
  k = CounterRng::mix(k ^ (trial * 0x8cb92ba72f3d8dd7ull + 0x632be59bd9b4e019ull));
  return k;
}

}  // namespace gkm
