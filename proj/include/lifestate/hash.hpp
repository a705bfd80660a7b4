#pragma once

#include <cstdint>

namespace lifestate {

/// The splitmix64 finalizer; platform-independent, used wherever a seed has
/// to become a reproducible stream.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace lifestate
