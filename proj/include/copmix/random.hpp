#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace copmix {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a master seed, a replicate index
/// and a stage tag ("simulate", "fit/cm", ...). SplitMix64 finalizer over an
/// FNV-1a hash of the tag.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replicate,
                                 std::string_view stage) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t tag = 0xcbf29ce484222325ULL;
  for (char c : stage) {
    tag ^= static_cast<unsigned char>(c);
    tag *= 0x100000001b3ULL;
  }
  return mix(mix(mix(master) ^ replicate) ^ tag);
}

inline double standard_normal(Rng &rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform01(Rng &rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

/// Gamma draw parameterised by shape and rate.
inline double gamma_shape_rate(Rng &rng, double shape, double rate) {
  return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

}  // namespace copmix
