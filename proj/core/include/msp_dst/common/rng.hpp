#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace msp {

using Rng = std::mt19937_64;

// 64-bit FNV-1a, used for fingerprints and for deriving independent seeds.
std::uint64_t fnv1a(std::string_view data, std::uint64_t basis = 14695981039346656037ULL);

// splitmix64 finalizer; mixes a base seed with a stream index.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Uniform double in [0, 1) from a hashed key; stable across runs and platforms.
double unit_hash(std::uint64_t seed, std::string_view key);

}  // namespace msp
