#include "geoembed/rng.hpp"

namespace geoembed {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng make_stream(std::uint64_t seed, std::uint64_t id, std::uint64_t counter,
                StreamTag tag) {
  std::uint64_t h = mix64(seed ^ static_cast<std::uint64_t>(tag));
  h = mix64(h ^ id);
  h = mix64(h ^ (counter * 0xd1b54a32d192ed03ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(counter)};
  return Rng(seq);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, StreamTag tag) {
  return mix64(mix64(master ^ static_cast<std::uint64_t>(tag)) + index);
}

}  // namespace geoembed
