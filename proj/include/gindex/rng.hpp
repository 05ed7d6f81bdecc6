#pragma once

#include <cstdint>
#include <random>

namespace gindex {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed of chain `chain_id` under `master_seed`: one SplitMix64 output taken
// at position chain_id + 1 of the stream started at master_seed.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t chain_id) {
  return mix64(master_seed + (chain_id + 1) * 0x9e3779b97f4a7c15ULL);
}

inline Rng make_rng(std::uint64_t master_seed, std::uint64_t chain_id) {
  return Rng(derive_seed(master_seed, chain_id));
}

}  // namespace gindex
