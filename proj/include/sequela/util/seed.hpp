#pragma once

#include <cstdint>

namespace sequela {

/// Derives an independent stream seed from (seed, index) with the splitmix64
/// finalizer. Used for per-patient and per-tree sub-seeds so results do not
/// depend on evaluation order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace sequela
