#pragma once

#include <cstdint>
#include <random>

namespace chainbound {

// splitmix64 step; used only to derive well-separated seeds, never as the
// sampling generator itself.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream for (seed, a, b), e.g. (user seed, grid index, sample
// index).  Every consumer of randomness goes through here so that results do
// not depend on call order or thread scheduling.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t a = 0,
                                   std::uint64_t b = 0) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  return std::mt19937_64(s);
}

// Uniform double in [0,1) built from the top 53 bits, identical on every
// platform (std::uniform_real_distribution is not pinned by the standard).
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by rejection; avoids modulo bias and, unlike
// std::uniform_int_distribution, is reproducible across standard libraries.
inline std::uint64_t uniform_below(std::mt19937_64& eng, std::uint64_t n) {
  const std::uint64_t limit = n * (UINT64_MAX / n);
  std::uint64_t v = eng();
  while (v >= limit) v = eng();
  return v % n;
}

}  // namespace chainbound
