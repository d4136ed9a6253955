#include "msp_dst/common/rng.hpp"

namespace msp {

std::uint64_t fnv1a(std::string_view data, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double unit_hash(std::uint64_t seed, std::string_view key) {
  const std::uint64_t h = mix_seed(seed, fnv1a(key));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace msp
