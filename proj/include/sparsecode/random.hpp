#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sparsecode {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives a child seed from a parent and a list of integer coordinates
// (grid size, trial index, stream tag, ...). Order-sensitive.
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = mix64(parent);
  for (std::uint64_t p : parts) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

// Stream tags used when one job seed feeds several independent generators.
enum class Stream : std::uint64_t {
  Expansion = 1,
  Calibration = 2,
  Training = 3,
  Test = 4,
  Probe = 5,
};

inline std::uint64_t stream_seed(std::uint64_t job_seed, Stream s) noexcept {
  return derive_seed(job_seed, {static_cast<std::uint64_t>(s)});
}

}  // namespace sparsecode
