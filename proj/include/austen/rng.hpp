#pragma once

#include <cstdint>
#include <random>

namespace austen {

// Independent stream per (seed, stream) pair. Used for simulation replicates,
// fold shuffles and bootstrap replicates so results do not depend on
// evaluation order.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace austen
