#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace knnft {

// 64-bit FNV-1a. Used both for feature hashing and for deriving named
// RNG substreams, so it must stay bit-exact across platforms.
constexpr std::uint64_t fnv1a64(std::string_view s,
                                std::uint64_t basis = 14695981039346656037ull) {
  std::uint64_t h = basis;
  for (unsigned char c : s) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

// All randomness in an experiment flows from a single seed through named
// substreams (init, sampling, shuffling, ...), so components can be tested
// for determinism in isolation.
inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name) {
  return std::mt19937_64(fnv1a64(name) ^ (seed * 0x9e3779b97f4a7c15ull));
}

}  // namespace knnft
