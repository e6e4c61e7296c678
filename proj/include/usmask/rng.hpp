#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace usmask {

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view s) noexcept;

// Seed of the per-image substream: identical on every platform.
std::uint64_t substream_seed(std::uint64_t global_seed, std::string_view image_id) noexcept;

// mt19937_64 with a portable open-interval double; std distributions are
// avoided because their output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next_u64() { return engine_(); }
  // Uniform in (0,1).
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace usmask
