#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mfl {

using Engine = std::mt19937_64;

// SplitMix64 finalizer. Used to derive independent seeds from a master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed tree: master -> stage (by name) -> item (by counter). A stage can be
// rerun in isolation because its seed only depends on (master, name).
constexpr std::uint64_t stage_seed(std::uint64_t master, std::string_view stage) {
  return splitmix64(master ^ fnv1a(stage));
}

constexpr std::uint64_t item_seed(std::uint64_t stage, std::uint64_t index) {
  return splitmix64(stage + splitmix64(index + 1));
}

}  // namespace mfl
