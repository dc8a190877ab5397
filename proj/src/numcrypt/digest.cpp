#include "epay/digest.hpp"

#include "epay/errors.hpp"
#include "epay/numtheory.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

namespace epay {

Digest256 sha256(std::span<const std::uint8_t> data) {
  Digest256 out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size()) {
    throw Error("sha256: digest failed");
  }
  return out;
}

Digest256 sha256(std::string_view text) {
  return sha256(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Digest256 hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data) {
  Digest256 out{};
  unsigned int len = 0;
  static const std::uint8_t kEmpty = 0;
  const std::uint8_t* key_ptr = key.empty() ? &kEmpty : key.data();
  if (HMAC(EVP_sha256(), key_ptr, static_cast<int>(key.size()), data.data(), data.size(),
           out.data(), &len) == nullptr ||
      len != out.size()) {
    throw Error("hmac_sha256: failed");
  }
  return out;
}

std::string bytes_to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

namespace {
int nibble(char ch) {
  if (ch >= '0' && ch <= '9') return ch - '0';
  if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
  if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
  return -1;
}
}  // namespace

Bytes hex_to_bytes(std::string_view hex) {
  if (hex.size() % 2 != 0) throw DomainError("hex_to_bytes: odd length");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = nibble(hex[i]);
    const int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) throw DomainError("hex_to_bytes: bad digit");
    out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
  }
  return out;
}

Bytes to_bytes(std::string_view text) { return Bytes(text.begin(), text.end()); }

Natural hash_to_int(std::span<const std::uint8_t> message, const Natural& modulus) {
  if (modulus < Natural(3)) throw DomainError("hash_to_int: modulus must be >= 3");
  const Digest256 digest = sha256(message);
  Natural h = Natural::from_bytes(digest) % modulus;
  while (h < Natural(2) || gcd(h, modulus) != Natural(1)) {
    h = (h + Natural(1)) % modulus;
  }
  return h;
}

Natural hash_to_int(std::string_view message, const Natural& modulus) {
  return hash_to_int(std::span(reinterpret_cast<const std::uint8_t*>(message.data()), message.size()),
                     modulus);
}

}  // namespace epay
