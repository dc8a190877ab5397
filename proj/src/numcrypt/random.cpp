#include "epay/random.hpp"

#include "epay/errors.hpp"

namespace epay {

void RandomSource::fill(std::span<std::uint8_t> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    std::uint64_t word = next_u64();
    for (int b = 0; b < 8 && i < out.size(); ++b, ++i) {
      out[i] = static_cast<std::uint8_t>(word & 0xff);
      word >>= 8;
    }
  }
}

std::vector<std::uint8_t> RandomSource::bytes(std::size_t count) {
  std::vector<std::uint8_t> out(count);
  fill(out);
  return out;
}

std::uint64_t RandomSource::below(std::uint64_t bound) {
  if (bound == 0) throw DomainError("RandomSource::below: zero bound");
  // Reject the top partial bucket to stay unbiased.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
  std::uint64_t draw;
  do {
    draw = next_u64();
  } while (draw > limit);
  return draw % bound;
}

Natural RandomSource::bits(std::size_t bits) {
  std::vector<std::uint8_t> buf((bits + 7) / 8);
  fill(buf);
  if (const std::size_t extra = buf.size() * 8 - bits; extra != 0 && !buf.empty()) {
    buf[0] &= static_cast<std::uint8_t>(0xff >> extra);
  }
  return Natural::from_bytes(buf);
}

Natural RandomSource::below(const Natural& bound) {
  if (bound.is_zero()) throw DomainError("RandomSource::below: zero bound");
  const std::size_t width = bound.bit_length();
  for (;;) {
    Natural draw = bits(width);
    if (draw < bound) return draw;
  }
}

std::uint64_t SystemRandom::next_u64() {
  const std::uint64_t hi = device_();
  const std::uint64_t lo = device_();
  return (hi << 32) ^ lo;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace epay
