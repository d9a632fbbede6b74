#pragma once

#include <cstdint>
#include <random>

namespace molrel {

/// Named purposes for random streams. Each training run derives one
/// independent generator per purpose from its seed so that, e.g., two modes
/// trained with the same seed see the same data order.
enum class Stream : std::uint64_t {
  kInit = 1,
  kShuffle = 2,
  kDropout = 3,
  kSgldNoise = 4,
  kSwagDraw = 5,
  kBbbNoise = 6,
  kSplit = 7,
};

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Generator for (seed, purpose, sub-index). `sub` separates ensemble members
/// or other repeated uses of one purpose.
Rng make_rng(std::uint64_t seed, Stream purpose, std::uint64_t sub = 0);

}  // namespace molrel
