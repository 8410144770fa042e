#pragma once

#include <cstdint>
#include <random>

namespace costplan {

// Mixes (seed, index) into an independent 64-bit seed (SplitMix64 finalizer).
// Sweep point i always draws from derive_seed(base, i), so results do not
// depend on the order in which points are evaluated.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

// Seeded 64-bit stream. The engine (mt19937_64) and the [0,1) conversion are
// both fully specified, so draws are bit-identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t seed, std::uint64_t index) { return Rng(derive_seed(seed, index)); }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace costplan
