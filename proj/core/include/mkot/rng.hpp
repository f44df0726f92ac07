#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

// Seedable randomness with output that is identical on every platform.
// std::mt19937_64 has a fully specified output sequence; the standard
// distributions and std::shuffle do not, so bounded draws and shuffling
// are done by hand here.
namespace mkot::rng {

using Engine = std::mt19937_64;

// Unbiased draw in [0, n), n >= 1, by rejection sampling.
inline std::uint64_t bounded(Engine& eng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t r = eng();
    if (r >= threshold) return r % n;
  }
}

// Uniform double in [0, 1) with 53 random mantissa bits.
inline double unit_real(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& eng, double lo, double hi) {
  return lo + (hi - lo) * unit_real(eng);
}

// Fisher-Yates shuffle driven by bounded().
template <class T>
void shuffle(std::vector<T>& v, Engine& eng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[bounded(eng, i)]);
  }
}

}  // namespace mkot::rng
