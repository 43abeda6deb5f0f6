// Counter-based seed derivation and uniform draws. Sub-streams depend only on
// (master seed, sample index), so parallel and serial runs agree exactly.
#pragma once

#include <cstdint>
#include <random>

namespace cim {

inline uint64_t mix64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

inline uint64_t derive_seed(uint64_t master, uint64_t index) {
  uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  return mix64(mix64(z) ^ 0xD1B54A32D192ED03ULL);
}

// In [0, 1); uses the top 53 bits so the value is platform-independent.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace cim
