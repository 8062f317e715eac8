// Random stream helpers shared by all samplers.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace sipx {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

/// Uniform index in [0, n) by multiply-shift; bias is below n / 2^64.
inline std::size_t uniform_index(Rng& g, std::size_t n) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(g()) * n) >> 64);
}

inline double exponential(Rng& g, double rate) { return -std::log1p(-uniform01(g)) / rate; }

/// Deterministic seed for (master, replica, stream label). For fixed master and
/// label the map replica -> seed is a bijection on 64-bit integers.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replica, std::string_view stream);

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace sipx
