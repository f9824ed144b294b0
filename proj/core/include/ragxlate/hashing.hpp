#pragma once

#include <cstdint>
#include <string_view>

namespace ragxlate {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x00000100000001b3ULL;

// FNV-1a, 64-bit. `seed` defaults to the standard offset basis; callers that
// need a reproducible keyed hash (the local embedder, stage fingerprints)
// document the seed they pass so results can be recomputed independently.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = kFnvOffsetBasis) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

}  // namespace ragxlate
