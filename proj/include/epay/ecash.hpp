#pragma once

#include "epay/digest.hpp"
#include "epay/errors.hpp"
#include "epay/natural.hpp"
#include "epay/random.hpp"

#include <compare>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>

namespace epay::ecash {

/// Withdrawal aborted because u = x1 (mod n); start a new session.
class DegenerateChallenge : public Error {
 public:
  using Error::Error;
};

/// A protocol value shares a nontrivial factor with n_B. With honest
/// parties this means the factorization of the bank modulus leaked.
class ModulusCompromised : public Error {
 public:
  using Error::Error;
};

/// The unblinded coin does not satisfy the bank's verification identity.
class BankSignatureInvalid : public Error {
 public:
  using Error::Error;
};

struct PublicKey {
  Natural e;
  Natural n;
  friend bool operator==(const PublicKey&, const PublicKey&) = default;
};

/// Bank signing material. e * w = 1 (mod theta), theta = (p-1)(q-1).
struct BankKeys {
  Natural p;
  Natural q;
  Natural n;
  Natural theta;
  Natural e;
  Natural w;

  PublicKey public_key() const { return {e, n}; }
  friend bool operator==(const BankKeys&, const BankKeys&) = default;
};

/// Two distinct `bits`-bit primes (bits >= 8); e is the smallest odd
/// value >= 3 coprime to theta.
BankKeys bank_keygen(std::size_t bits, RandomSource& rng);
/// Derives the full key from fixed primes. Throws DomainError when p = q or
/// either is below 3.
BankKeys bank_keys_from_primes(const Natural& p, const Natural& q);

/// Calendar date; ISO-8601 text form YYYY-MM-DD.
struct Date {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;

  static Date parse(std::string_view iso);
  std::string iso() const;
  friend auto operator<=>(const Date&, const Date&) = default;
};

struct CoinAttributes {
  Date expiry;
  std::uint64_t value_cents = 0;
  /// 32 lowercase hex characters.
  std::string serial;

  /// "EC1|" expiry "|" value "|" serial. This is the signed message b.
  std::string encode() const;
  static CoinAttributes decode(std::string_view encoding);
  static std::string random_serial(RandomSource& rng);
  friend bool operator==(const CoinAttributes&, const CoinAttributes&) = default;
};

/// User-side secrets chosen in the request step. Exposed so a recorded
/// transcript can be replayed.
struct BlindingFactors {
  Natural r;
  Natural u;
  Bytes x0;
};

/// What the user sends in the request step: (b, a_msg).
struct WithdrawalRequest {
  std::string b;
  Natural a_msg;
};

/// What the bank returns in the signing step.
struct BankSignature {
  Natural beta_inv;
  Natural t1;
};

struct Coin {
  CoinAttributes attributes;
  Natural h_x0;
  Natural c1;
  Natural s1;
  friend bool operator==(const Coin&, const Coin&) = default;
};

/// User side of one withdrawal. Single owner; advances request -> blind ->
/// unblind and rejects out-of-order calls with StateError.
class WithdrawalSession {
 public:
  enum class Stage { kRequested, kBlinded, kUnblinded };

  Stage stage() const { return stage_; }
  const PublicKey& key() const { return key_; }
  const CoinAttributes& attributes() const { return attributes_; }
  const BlindingFactors& factors() const { return factors_; }
  const Natural& h_x0() const { return h_x0_; }
  const Natural& a_msg() const { return a_msg_; }
  const Natural& x1() const { return x1_; }
  const Natural& r1() const { return r1_; }
  const Natural& b2() const { return b2_; }

 private:
  friend std::pair<WithdrawalSession, WithdrawalRequest> user_withdraw_init(const PublicKey&,
                                                                            CoinAttributes,
                                                                            BlindingFactors);
  friend Natural user_blind(WithdrawalSession&, const Natural&, const Natural&);
  friend Coin user_unblind(WithdrawalSession&, const BankSignature&);

  Stage stage_ = Stage::kRequested;
  PublicKey key_;
  CoinAttributes attributes_;
  BlindingFactors factors_;
  Natural h_x0_;
  Natural a_msg_;
  Natural x1_;
  Natural r1_;
  Natural b2_;
};

/// Request step with fresh r, u (units) and a 32-byte seed x0.
std::pair<WithdrawalSession, WithdrawalRequest> user_withdraw_init(const PublicKey& key,
                                                                   CoinAttributes attributes,
                                                                   RandomSource& rng);
/// Request step with caller-chosen factors:
/// a_msg = r^e * h(x0) * (u^2 + 1) mod n.
std::pair<WithdrawalSession, WithdrawalRequest> user_withdraw_init(const PublicKey& key,
                                                                   CoinAttributes attributes,
                                                                   BlindingFactors factors);

/// Bank challenge x1, uniform in [1, n).
Natural bank_challenge(const BankKeys& keys, RandomSource& rng);

/// beta = (r r1)^e (u - x1) mod n, with a fresh unit r1.
Natural user_blind(WithdrawalSession& session, const Natural& x1, RandomSource& rng);
Natural user_blind(WithdrawalSession& session, const Natural& x1, const Natural& r1);

/// beta_inv = beta^-1 and
/// t1 = h(b)^w * (a_msg (x1^2 + 1) beta_inv^2)^(2w mod theta) mod n.
BankSignature bank_sign(const BankKeys& keys, std::string_view b, const Natural& a_msg,
                        const Natural& x1, const Natural& beta);

/// c1 = (u x1 + 1) beta_inv (r r1)^e, s1 = t1 r^2 r1^4 (mod n). The result
/// is checked with verify_coin; failure throws BankSignatureInvalid.
Coin user_unblind(WithdrawalSession& session, const BankSignature& signature);

/// s1^e == h(b) * (h(x0) * (c1^2 + 1))^2 (mod n).
bool verify_coin(const PublicKey& key, const Coin& coin);

/// SHA-256 hex of (b-encoding || hex(c1)).
std::string coin_id(const Coin& coin);

/// Identifiers of deposited coins. Append-only; callers serialize writes.
class SpentLedger {
 public:
  bool contains(const std::string& id) const { return entries_.contains(id); }
  /// Returns false if the id was already present.
  bool append(const std::string& id) { return entries_.insert(id).second; }
  std::size_t size() const { return entries_.size(); }
  const std::set<std::string>& entries() const { return entries_; }

 private:
  std::set<std::string> entries_;
};

enum class DepositStatus { kAccepted, kInvalidSignature, kExpired, kDoubleSpend };

std::string_view to_string(DepositStatus status);

/// Checks signature, then expiry against `today`, then the ledger; appends
/// the coin id on acceptance.
DepositStatus deposit_coin(SpentLedger& ledger, const PublicKey& key, const Coin& coin,
                           const Date& today);

}  // namespace epay::ecash
