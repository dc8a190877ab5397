#include "epay/harness.hpp"
#include "epay/rc5.hpp"

namespace epay::harness {

using nlohmann::json;

namespace {

constexpr std::size_t kTagSize = 32;
constexpr std::size_t kKeySize = 16;

void check_key(const Bytes& key) {
  if (key.size() != kKeySize) throw DomainError("channel key must be 16 bytes");
}

Digest256 mac_key(const Bytes& key) {
  static constexpr std::string_view kLabel = "VP1 mac";
  return hmac_sha256(key, to_bytes(kLabel));
}

Digest256 tag(const Bytes& key, std::string_view kind, const Bytes& iv, std::span<const std::uint8_t> payload) {
  Bytes message = to_bytes(kind);
  message.push_back(0);
  message.insert(message.end(), iv.begin(), iv.end());
  message.insert(message.end(), payload.begin(), payload.end());
  const Digest256 k = mac_key(key);
  return hmac_sha256(k, message);
}

bool equal_constant_time(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) return false;
  std::uint8_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff |= static_cast<std::uint8_t>(a[i] ^ b[i]);
  return diff == 0;
}

}  // namespace

std::string WireRecord::to_text() const {
  return json{{"v", version}, {"kind", kind}, {"iv", bytes_to_hex(iv)}, {"ct", bytes_to_hex(ciphertext)}}.dump();
}

WireRecord WireRecord::from_text(std::string_view text) {
  try {
    const json j = json::parse(text);
    WireRecord r;
    r.version = j.at("v").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.iv = hex_to_bytes(j.at("iv").get<std::string>());
    r.ciphertext = hex_to_bytes(j.at("ct").get<std::string>());
    return r;
  } catch (const json::exception& e) {
    throw ChannelCorrupt(std::string("wire record: ") + e.what());
  } catch (const DomainError& e) {
    throw ChannelCorrupt(std::string("wire record: ") + e.what());
  }
}

WireRecord wire_encode(std::string_view kind, std::string_view payload, const Bytes& channel_key,
                       std::uint64_t counter) {
  check_key(channel_key);
  Rc5Params params;
  params.key = channel_key;

  Rc5Block block{};
  for (std::size_t i = 0; i < block.size(); ++i) block[i] = static_cast<std::uint8_t>(counter >> (56 - 8 * i));
  const Rc5Block iv = rc5_block(Direction::kEncrypt, params, block);

  WireRecord record;
  record.kind = std::string(kind);
  record.iv.assign(iv.begin(), iv.end());
  params.iv = record.iv;

  Bytes plain = to_bytes(payload);
  const Digest256 t = tag(channel_key, kind, record.iv, plain);
  plain.insert(plain.end(), t.begin(), t.end());
  record.ciphertext = rc5_cbc(Direction::kEncrypt, params, plain);
  return record;
}

WireMessage wire_decode(const WireRecord& record, const Bytes& channel_key) {
  check_key(channel_key);
  if (record.version != kWireVersion) throw ChannelCorrupt("wire record: unsupported version");
  if (record.iv.size() != Rc5Params::kBlockSize) throw ChannelCorrupt("wire record: bad iv length");

  Rc5Params params;
  params.key = channel_key;
  params.iv = record.iv;
  Bytes plain = rc5_cbc(Direction::kDecrypt, params, record.ciphertext);
  if (plain.size() < kTagSize) throw ChannelCorrupt("wire record: truncated");

  const std::span<const std::uint8_t> payload(plain.data(), plain.size() - kTagSize);
  const std::span<const std::uint8_t> received(plain.data() + payload.size(), kTagSize);
  const Digest256 expected = tag(channel_key, record.kind, record.iv, payload);
  if (!equal_constant_time(expected, received)) throw ChannelCorrupt("wire record: authentication tag mismatch");
  return {record.kind, std::string(payload.begin(), payload.end())};
}

WireChannel::WireChannel(Bytes key, std::uint64_t counter_base) : key_(std::move(key)), counter_(counter_base) {
  check_key(key_);
}

WireRecord WireChannel::seal(std::string_view kind, std::string_view payload) {
  return wire_encode(kind, payload, key_, counter_.fetch_add(1));
}

}  // namespace epay::harness
