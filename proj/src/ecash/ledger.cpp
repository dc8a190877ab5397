#include "epay/ecash.hpp"

namespace epay::ecash {

std::string coin_id(const Coin& coin) {
  return bytes_to_hex(sha256(coin.attributes.encode() + coin.c1.to_hex()));
}

std::string_view to_string(DepositStatus status) {
  switch (status) {
    case DepositStatus::kAccepted:
      return "accepted";
    case DepositStatus::kInvalidSignature:
      return "invalid-signature";
    case DepositStatus::kExpired:
      return "expired";
    case DepositStatus::kDoubleSpend:
      return "double-spend";
  }
  return "unknown";
}

DepositStatus deposit_coin(SpentLedger& ledger, const PublicKey& key, const Coin& coin,
                           const Date& today) {
  if (!verify_coin(key, coin)) return DepositStatus::kInvalidSignature;
  if (coin.attributes.expiry < today) return DepositStatus::kExpired;
  if (!ledger.append(coin_id(coin))) return DepositStatus::kDoubleSpend;
  return DepositStatus::kAccepted;
}

}  // namespace epay::ecash
