#pragma once

#include <cstdint>
#include <random>

namespace qct {

using Rng = std::mt19937_64;

namespace detail {
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Seed for task `k` of a run with `master_seed`. Depends only on the pair,
/// so results do not depend on how tasks are scheduled.
constexpr std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t k) {
  return detail::splitmix64(detail::splitmix64(master_seed) ^ detail::splitmix64(k + 0x632be59bd9b4e019ULL));
}

inline Rng make_stream(std::uint64_t master_seed, std::uint64_t k) {
  return Rng(stream_seed(master_seed, k));
}

}  // namespace qct
