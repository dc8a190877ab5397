#pragma once

#include "epay/digest.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace epay {

/// RC5 with 32-bit words. Defaults are the canonical RC5-32/12/16.
struct Rc5Params {
  static constexpr std::size_t kBlockSize = 8;

  unsigned rounds = 12;
  Bytes key = Bytes(16, 0);
  /// CBC only; must be kBlockSize bytes when used.
  Bytes iv = Bytes(kBlockSize, 0);

  /// Throws DomainError on rounds > 255 or key longer than 255 bytes.
  void validate() const;
};

using Rc5Block = std::array<std::uint8_t, Rc5Params::kBlockSize>;

enum class Direction { kEncrypt, kDecrypt };

/// Expanded RC5-32 key schedule.
class Rc5 {
 public:
  Rc5(std::span<const std::uint8_t> key, unsigned rounds);

  Rc5Block encrypt(const Rc5Block& block) const;
  Rc5Block decrypt(const Rc5Block& block) const;

  unsigned rounds() const { return rounds_; }

 private:
  unsigned rounds_;
  std::vector<std::uint32_t> table_;
};

/// Single block in either direction. block must be 8 bytes.
Rc5Block rc5_block(Direction direction, const Rc5Params& params,
                   std::span<const std::uint8_t> block);

/// CBC mode with RFC 2040 padding (1..8 pad bytes, each equal to the pad
/// length, always present). Decrypt throws ChannelCorrupt on bad length or
/// padding.
Bytes rc5_cbc(Direction direction, const Rc5Params& params, std::span<const std::uint8_t> payload);

}  // namespace epay
