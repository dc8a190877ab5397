#include "epay/harness.hpp"

#include <chrono>

namespace epay::harness {

using nlohmann::json;

namespace {

Natural hex_field(const json& j, const char* name) { return Natural::from_hex(j.at(name).get<std::string>()); }

}  // namespace

json to_json(const ecash::PublicKey& key) { return {{"e", key.e.to_hex()}, {"n", key.n.to_hex()}}; }

ecash::PublicKey public_key_from_json(const json& j) { return {hex_field(j, "e"), hex_field(j, "n")}; }

json to_json(const ecash::BankKeys& keys) {
  return {{"p", keys.p.to_hex()}, {"q", keys.q.to_hex()}, {"e", keys.e.to_hex()}, {"n", keys.n.to_hex()}};
}

ecash::BankKeys bank_keys_from_json(const json& j) {
  ecash::BankKeys keys = ecash::bank_keys_from_primes(hex_field(j, "p"), hex_field(j, "q"));
  if (j.contains("e") && hex_field(j, "e") != keys.e) throw DomainError("bank key file: exponent mismatch");
  if (j.contains("n") && hex_field(j, "n") != keys.n) throw DomainError("bank key file: modulus mismatch");
  return keys;
}

json to_json(const ecash::Coin& coin) {
  return {{"b", coin.attributes.encode()},
          {"h_x0", coin.h_x0.to_hex()},
          {"c1", coin.c1.to_hex()},
          {"s1", coin.s1.to_hex()}};
}

ecash::Coin coin_from_json(const json& j) {
  return {ecash::CoinAttributes::decode(j.at("b").get<std::string>()), hex_field(j, "h_x0"), hex_field(j, "c1"),
          hex_field(j, "s1")};
}

ecash::Date date_from_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(sys_seconds{seconds{t}});
  const year_month_day ymd{day};
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day())};
}

Timestamp system_clock_now() {
  using namespace std::chrono;
  return duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace epay::harness
