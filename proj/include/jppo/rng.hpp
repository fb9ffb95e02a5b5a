#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace jppo {

// Random streams.
//
// Every stochastic component draws from its own std::mt19937_64 engine. The
// engine's output sequence is fixed by the C++ standard, and the conversions
// below avoid the implementation-defined std:: distributions, so a
// (seed, stream, index) triple yields the same numbers on every platform.
//
// Stream seeds are derived from the root seed by key-splitting:
//   derive_seed(root, tag, index) = splitmix64(splitmix64(root ^ fnv1a(tag)) + index)
// where fnv1a is the 64-bit FNV-1a hash of the ASCII tag.

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                          std::uint64_t index = 0) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on (0, 1]; never returns 0.
  double uniform_open_closed() noexcept;
  // Uniform on [0, 1).
  double uniform() noexcept;
  // Uniform integer in [0, n); n must be > 0. Unbiased (rejection sampling).
  std::uint64_t uniform_index(std::uint64_t n) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

  std::uint64_t next_u64() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace jppo
