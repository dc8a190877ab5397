#pragma once

#include "epay/natural.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace epay {

using Bytes = std::vector<std::uint8_t>;
using Digest256 = std::array<std::uint8_t, 32>;

Digest256 sha256(std::span<const std::uint8_t> data);
Digest256 sha256(std::string_view text);
Digest256 hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data);

std::string bytes_to_hex(std::span<const std::uint8_t> data);
/// Even-length hex to bytes; throws DomainError on malformed input.
Bytes hex_to_bytes(std::string_view hex);
Bytes to_bytes(std::string_view text);

/// Maps a message to a unit h with 2 <= h < modulus.
///
/// SHA-256 of the message, read big-endian, reduced mod modulus; then
/// h <- (h + 1) mod modulus until 2 <= h and gcd(h, modulus) = 1. Always
/// terminates because modulus - 1 qualifies. Requires modulus >= 3.
Natural hash_to_int(std::span<const std::uint8_t> message, const Natural& modulus);
Natural hash_to_int(std::string_view message, const Natural& modulus);

}  // namespace epay
