#include "epay/ecash.hpp"

#include "epay/numtheory.hpp"

namespace epay::ecash {

namespace {
constexpr std::size_t kSeedBytes = 32;
}

std::pair<WithdrawalSession, WithdrawalRequest> user_withdraw_init(const PublicKey& key,
                                                                   CoinAttributes attributes,
                                                                   RandomSource& rng) {
  BlindingFactors factors;
  factors.r = rand_unit(key.n, rng);
  factors.u = rand_unit(key.n, rng);
  factors.x0 = rng.bytes(kSeedBytes);
  return user_withdraw_init(key, std::move(attributes), std::move(factors));
}

std::pair<WithdrawalSession, WithdrawalRequest> user_withdraw_init(const PublicKey& key,
                                                                   CoinAttributes attributes,
                                                                   BlindingFactors factors) {
  const Natural& n = key.n;
  if (n < Natural(3)) throw DomainError("withdraw: bad public modulus");
  if (gcd(factors.r, n) != Natural(1)) throw DomainError("withdraw: r must be a unit");

  WithdrawalSession session;
  session.key_ = key;
  session.attributes_ = std::move(attributes);
  session.factors_ = std::move(factors);
  session.h_x0_ = hash_to_int(session.factors_.x0, n);

  const Natural& u = session.factors_.u;
  const Natural u_sq_plus_1 = (u * u + Natural(1)) % n;
  session.a_msg_ = mod_exp(session.factors_.r, key.e, n) * session.h_x0_ % n * u_sq_plus_1 % n;
  session.stage_ = WithdrawalSession::Stage::kRequested;

  WithdrawalRequest request{session.attributes_.encode(), session.a_msg_};
  return {std::move(session), std::move(request)};
}

Natural user_blind(WithdrawalSession& session, const Natural& x1, RandomSource& rng) {
  if (session.stage() != WithdrawalSession::Stage::kRequested) {
    throw StateError("user_blind: session is not awaiting a challenge");
  }
  return user_blind(session, x1, rand_unit(session.key().n, rng));
}

Natural user_blind(WithdrawalSession& session, const Natural& x1, const Natural& r1) {
  if (session.stage_ != WithdrawalSession::Stage::kRequested) {
    throw StateError("user_blind: session is not awaiting a challenge");
  }
  const Natural& n = session.key_.n;
  const Natural x1_mod = x1 % n;
  const Natural u_mod = session.factors_.u % n;
  const Natural diff = (u_mod + n - x1_mod) % n;
  if (diff.is_zero()) throw DegenerateChallenge("user_blind: u = x1 (mod n)");
  if (gcd(diff, n) != Natural(1)) throw ModulusCompromised("user_blind: u - x1 shares a factor with n");
  if (gcd(r1, n) != Natural(1)) throw DomainError("user_blind: r1 must be a unit");

  session.x1_ = x1_mod;
  session.r1_ = r1 % n;
  session.b2_ = session.factors_.r * session.r1_ % n;
  session.stage_ = WithdrawalSession::Stage::kBlinded;
  return mod_exp(session.b2_, session.key_.e, n) * diff % n;
}

Coin user_unblind(WithdrawalSession& session, const BankSignature& signature) {
  if (session.stage_ != WithdrawalSession::Stage::kBlinded) {
    throw StateError("user_unblind: session has no outstanding blind request");
  }
  const Natural& n = session.key_.n;
  const Natural& u = session.factors_.u;
  const Natural& r = session.factors_.r;
  const Natural& r1 = session.r1_;

  Coin coin;
  coin.attributes = session.attributes_;
  coin.h_x0 = session.h_x0_;
  coin.c1 = (u * session.x1_ + Natural(1)) % n * (signature.beta_inv % n) % n *
            mod_exp(session.b2_, session.key_.e, n) % n;
  const Natural r1_sq = r1 * r1 % n;
  coin.s1 = signature.t1 % n * (r * r % n) % n * (r1_sq * r1_sq % n) % n;
  session.stage_ = WithdrawalSession::Stage::kUnblinded;

  if (!verify_coin(session.key_, coin)) {
    throw BankSignatureInvalid("user_unblind: coin fails the bank verification identity");
  }
  return coin;
}

bool verify_coin(const PublicKey& key, const Coin& coin) {
  const Natural& n = key.n;
  if (n < Natural(3)) return false;
  if (coin.c1 >= n || coin.s1 >= n || coin.h_x0 >= n) return false;
  std::string b;
  try {
    b = coin.attributes.encode();
  } catch (const DomainError&) {
    return false;
  }
  const Natural h_b = hash_to_int(b, n);
  const Natural factor = coin.h_x0 * ((coin.c1 * coin.c1 + Natural(1)) % n) % n;
  const Natural expected = h_b * (factor * factor % n) % n;
  return mod_exp(coin.s1, key.e, n) == expected;
}

}  // namespace epay::ecash
