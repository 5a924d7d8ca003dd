#pragma once

#include <cstdint>
#include <limits>

namespace dmcv {

// SplitMix64 (Steele, Lea & Flood). Used two ways: as the mixing function for
// deriving independent seeds, and as a small UniformRandomBitGenerator.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64_mix(state_);
  }

 private:
  std::uint64_t state_;
};

// Counter scheme: element `index` of stream `stream` under `seed` gets its own
// generator, so results never depend on how work is chunked.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64_mix(splitmix64_mix(seed ^ splitmix64_mix(stream + 0x632be59bd9b4e019ULL)) + index);
}

inline SplitMix64 stream_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return SplitMix64(derive_seed(seed, stream, index));
}

}  // namespace dmcv
