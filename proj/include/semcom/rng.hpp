#pragma once

#include <cstdint>
#include <random>

namespace semcom {

using Rng = std::mt19937_64;

/// Named random streams. Each stream derived from the same experiment seed is
/// statistically independent of the others, so reseeding one leaves the draws
/// of the rest untouched.
enum class Stream : std::uint32_t {
  Channel = 1,
  Semantic = 2,
  PolicyInit = 3,
  Exploration = 4,
  Evaluation = 5,
  Prototypes = 6,
};

inline Rng make_stream(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

/// Child generator keyed by (parent seed, key); used for per-user streams.
inline Rng derive(std::uint64_t seed, std::uint64_t key) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32), 0x5eedu};
  return Rng(seq);
}

}  // namespace semcom
