#include "epay/rc5.hpp"

#include "epay/errors.hpp"

#include <algorithm>
#include <bit>

namespace epay {

namespace {

constexpr std::uint32_t kP32 = 0xB7E15163u;
constexpr std::uint32_t kQ32 = 0x9E3779B9u;

std::uint32_t load_le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void store_le(std::uint32_t v, std::uint8_t* p) {
  p[0] = static_cast<std::uint8_t>(v);
  p[1] = static_cast<std::uint8_t>(v >> 8);
  p[2] = static_cast<std::uint8_t>(v >> 16);
  p[3] = static_cast<std::uint8_t>(v >> 24);
}

// Rotation amount is the low five bits of the data word.
std::uint32_t rotl(std::uint32_t v, std::uint32_t s) { return std::rotl(v, static_cast<int>(s & 31)); }
std::uint32_t rotr(std::uint32_t v, std::uint32_t s) { return std::rotr(v, static_cast<int>(s & 31)); }

}  // namespace

void Rc5Params::validate() const {
  if (rounds > 255) throw DomainError("rc5: rounds must be in [0, 255]");
  if (key.size() > 255) throw DomainError("rc5: key longer than 255 bytes");
}

Rc5::Rc5(std::span<const std::uint8_t> key, unsigned rounds) : rounds_(rounds) {
  if (rounds > 255) throw DomainError("rc5: rounds must be in [0, 255]");
  if (key.size() > 255) throw DomainError("rc5: key longer than 255 bytes");

  const std::size_t c = std::max<std::size_t>(1, (key.size() + 3) / 4);
  std::vector<std::uint32_t> words(c, 0);
  for (std::size_t i = key.size(); i-- > 0;) {
    words[i / 4] = (words[i / 4] << 8) + key[i];
  }

  const std::size_t t = 2 * (static_cast<std::size_t>(rounds) + 1);
  table_.resize(t);
  table_[0] = kP32;
  for (std::size_t i = 1; i < t; ++i) table_[i] = table_[i - 1] + kQ32;

  std::uint32_t a = 0;
  std::uint32_t b = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  for (std::size_t k = 0; k < 3 * std::max(t, c); ++k) {
    a = table_[i] = rotl(table_[i] + a + b, 3);
    b = words[j] = rotl(words[j] + a + b, a + b);
    i = (i + 1) % t;
    j = (j + 1) % c;
  }
}

Rc5Block Rc5::encrypt(const Rc5Block& block) const {
  std::uint32_t a = load_le(block.data()) + table_[0];
  std::uint32_t b = load_le(block.data() + 4) + table_[1];
  for (unsigned r = 1; r <= rounds_; ++r) {
    a = rotl(a ^ b, b) + table_[2 * r];
    b = rotl(b ^ a, a) + table_[2 * r + 1];
  }
  Rc5Block out{};
  store_le(a, out.data());
  store_le(b, out.data() + 4);
  return out;
}

Rc5Block Rc5::decrypt(const Rc5Block& block) const {
  std::uint32_t a = load_le(block.data());
  std::uint32_t b = load_le(block.data() + 4);
  for (unsigned r = rounds_; r >= 1; --r) {
    b = rotr(b - table_[2 * r + 1], a) ^ a;
    a = rotr(a - table_[2 * r], b) ^ b;
  }
  Rc5Block out{};
  store_le(a - table_[0], out.data());
  store_le(b - table_[1], out.data() + 4);
  return out;
}

Rc5Block rc5_block(Direction direction, const Rc5Params& params,
                   std::span<const std::uint8_t> block) {
  params.validate();
  if (block.size() != Rc5Params::kBlockSize) throw DomainError("rc5_block: block must be 8 bytes");
  const Rc5 cipher(params.key, params.rounds);
  Rc5Block in{};
  std::copy(block.begin(), block.end(), in.begin());
  return direction == Direction::kEncrypt ? cipher.encrypt(in) : cipher.decrypt(in);
}

Bytes rc5_cbc(Direction direction, const Rc5Params& params, std::span<const std::uint8_t> payload) {
  params.validate();
  constexpr std::size_t kBs = Rc5Params::kBlockSize;
  if (params.iv.size() != kBs) throw DomainError("rc5_cbc: iv must be 8 bytes");
  const Rc5 cipher(params.key, params.rounds);
  Rc5Block chain{};
  std::copy(params.iv.begin(), params.iv.end(), chain.begin());

  if (direction == Direction::kEncrypt) {
    Bytes padded(payload.begin(), payload.end());
    const std::size_t pad = kBs - payload.size() % kBs;
    padded.insert(padded.end(), pad, static_cast<std::uint8_t>(pad));
    Bytes out(padded.size());
    for (std::size_t off = 0; off < padded.size(); off += kBs) {
      Rc5Block block{};
      for (std::size_t k = 0; k < kBs; ++k) block[k] = padded[off + k] ^ chain[k];
      chain = cipher.encrypt(block);
      std::copy(chain.begin(), chain.end(), out.begin() + static_cast<std::ptrdiff_t>(off));
    }
    return out;
  }

  if (payload.empty() || payload.size() % kBs != 0) {
    throw ChannelCorrupt("rc5_cbc: ciphertext length is not a positive multiple of 8");
  }
  Bytes out(payload.size());
  for (std::size_t off = 0; off < payload.size(); off += kBs) {
    Rc5Block block{};
    std::copy_n(payload.begin() + static_cast<std::ptrdiff_t>(off), kBs, block.begin());
    const Rc5Block plain = cipher.decrypt(block);
    for (std::size_t k = 0; k < kBs; ++k) out[off + k] = plain[k] ^ chain[k];
    chain = block;
  }
  const std::uint8_t pad = out.back();
  if (pad == 0 || pad > kBs) throw ChannelCorrupt("rc5_cbc: bad padding");
  for (std::size_t k = out.size() - pad; k < out.size(); ++k) {
    if (out[k] != pad) throw ChannelCorrupt("rc5_cbc: bad padding");
  }
  out.resize(out.size() - pad);
  return out;
}

}  // namespace epay
