#pragma once

#include <cstdint>
#include <random>

namespace geoembed {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to turn structured keys into well-mixed seeds.
std::uint64_t mix64(std::uint64_t x);

/// Tags separating independent families of draws that share a key.
enum class StreamTag : std::uint64_t {
  ball = 0x62616c6cULL,
  gaussian = 0x67617573ULL,
  trial = 0x7472696cULL,
  tree = 0x74726565ULL,
  whitening = 0x77686974ULL,
  cell = 0x63656c6cULL,
};

/// Counter-based stream: the generator for (seed, id, counter, tag) depends
/// only on those four values, so redrawing one key never shifts another.
Rng make_stream(std::uint64_t seed, std::uint64_t id, std::uint64_t counter,
                StreamTag tag);

/// Derives the seed of the i-th independent trial under a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                          StreamTag tag = StreamTag::trial);

}  // namespace geoembed
