#include "epay/ecash.hpp"

#include "epay/numtheory.hpp"

namespace epay::ecash {

BankKeys bank_keys_from_primes(const Natural& p, const Natural& q) {
  if (p < Natural(3) || q < Natural(3)) throw DomainError("bank primes must be >= 3");
  if (p == q) throw DomainError("bank primes must differ");
  BankKeys keys;
  keys.p = p;
  keys.q = q;
  keys.n = p * q;
  keys.theta = (p - Natural(1)) * (q - Natural(1));
  Natural e(3);
  while (gcd(e, keys.theta) != Natural(1)) e += Natural(2);
  if (e >= keys.theta) throw DomainError("no public exponent below theta");
  keys.e = e;
  keys.w = mod_inv(e, keys.theta);
  return keys;
}

BankKeys bank_keygen(std::size_t bits, RandomSource& rng) {
  if (bits < 8) throw DomainError("bank_keygen: at least 8 bits per prime");
  for (;;) {
    const Natural p = gen_prime(bits, rng);
    const Natural q = gen_prime(bits, rng);
    if (p != q) return bank_keys_from_primes(p, q);
  }
}

Natural bank_challenge(const BankKeys& keys, RandomSource& rng) {
  return rng.below(keys.n - Natural(1)) + Natural(1);
}

BankSignature bank_sign(const BankKeys& keys, std::string_view b, const Natural& a_msg,
                        const Natural& x1, const Natural& beta) {
  const Natural& n = keys.n;
  BankSignature out;
  try {
    out.beta_inv = mod_inv(beta, n);
  } catch (const NotInvertible&) {
    throw ModulusCompromised("bank_sign: beta is not a unit mod n");
  }
  const Natural h_b = hash_to_int(b, n);
  const Natural x1_sq_plus_1 = (x1 * x1 + Natural(1)) % n;
  const Natural inner = a_msg % n * x1_sq_plus_1 % n * (out.beta_inv * out.beta_inv % n) % n;
  // Bank holds theta, so it may reduce the exponent.
  const Natural twice_w = Natural(2) * keys.w % keys.theta;
  out.t1 = mod_exp(h_b, keys.w, n) * mod_exp(inner, twice_w, n) % n;
  return out;
}

}  // namespace epay::ecash
