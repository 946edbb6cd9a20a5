#ifndef CMAB_RNG_HPP
#define CMAB_RNG_HPP

#include <cstdint>
#include <random>

namespace cmab {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of substream `stream` under `seed`. Streams are independent of
/// one another, so adding streams never perturbs existing ones.
constexpr std::uint64_t substream_seed(std::uint64_t seed,
                                       std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng make_substream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(substream_seed(seed, stream));
}

/// Uniform double in [0, 1) built from the top 53 bits; unlike
/// std::uniform_real_distribution this is identical on every platform.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace cmab

#endif  // CMAB_RNG_HPP
