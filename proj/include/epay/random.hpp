#pragma once

#include "epay/natural.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace epay {

/// Injectable source of randomness. Every protocol step and simulation
/// draws through one of these so transcripts can be replayed from a seed.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual std::uint64_t next_u64() = 0;

  void fill(std::span<std::uint8_t> out);
  std::vector<std::uint8_t> bytes(std::size_t count);
  /// Uniform in [0, bound). bound must be nonzero.
  std::uint64_t below(std::uint64_t bound);
  /// Uniform in [0, bound) by rejection sampling on bit_length(bound) bits.
  Natural below(const Natural& bound);
  /// Uniform over all values of exactly `bits` random bits (top bit free).
  Natural bits(std::size_t bits);
};

/// Deterministic generator for tests and reproducible simulations.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next_u64() override { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Non-deterministic generator backed by std::random_device.
class SystemRandom final : public RandomSource {
 public:
  std::uint64_t next_u64() override;

 private:
  std::random_device device_;
};

/// splitmix64 step; used to derive independent per-trial seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace epay
