#pragma once

#include <cstdint>

namespace jdim {

// Deterministic sample-direction phase in [0, 2pi) from a user seed.
// Seed 0 keeps the real-axis orientation.
inline double orientation_from_seed(unsigned seed) {
  if (seed == 0) return 0.0;
  std::uint64_t x = seed;  // splitmix64
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  x ^= x >> 31;
  return 2.0 * 3.141592653589793238462643383279502884 *
         (static_cast<double>(x >> 11) * 0x1.0p-53);
}

}  // namespace jdim
