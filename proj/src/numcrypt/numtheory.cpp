#include "epay/numtheory.hpp"

#include <array>

namespace epay {

namespace {

using Rep = Natural::Rep;

constexpr std::array<unsigned, 54> kSmallPrimes = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,
    47,  53,  59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107,
    109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181,
    191, 193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251};

// One Miller-Rabin witness test; n odd, n - 1 = d * 2^s.
bool passes_round(const Natural& n, const Natural& n_minus_1, const Natural& d,
                  std::size_t s, const Natural& base) {
  Natural x = mod_exp(base, d, n);
  if (x == Natural(1) || x == n_minus_1) return true;
  for (std::size_t r = 1; r < s; ++r) {
    x = x * x % n;
    if (x == n_minus_1) return true;
    if (x == Natural(1)) return false;
  }
  return false;
}

}  // namespace

Natural mod_exp(const Natural& base, const Natural& exponent, const Natural& modulus) {
  if (modulus < Natural(2)) throw DomainError("mod_exp: modulus must be >= 2");
  const Rep& m = modulus.rep();
  Rep b = base.rep() % m;
  Rep acc = 1;
  for (std::size_t i = exponent.bit_length(); i-- > 0;) {
    acc = acc * acc % m;
    if (exponent.bit(i)) acc = acc * b % m;
  }
  return Natural(acc % m);
}

Natural mod_inv(const Natural& value, const Natural& modulus) {
  if (modulus < Natural(2)) throw DomainError("mod_inv: modulus must be >= 2");
  // Extended Euclid keeping only the coefficient of `value`.
  Rep old_r = value.rep() % modulus.rep();
  Rep r = modulus.rep();
  Rep old_s = 1;
  Rep s = 0;
  while (!r.is_zero()) {
    const Rep q = old_r / r;
    Rep t = old_r - q * r;
    old_r = r;
    r = t;
    t = old_s - q * s;
    old_s = s;
    s = t;
  }
  // old_r is gcd(value mod m, m); gcd(0, m) = m.
  if (old_r != 1) throw NotInvertible(Natural(old_r));
  Rep inv = old_s % modulus.rep();
  if (inv.sign() < 0) inv += modulus.rep();
  return Natural(inv);
}

Natural gcd(const Natural& a, const Natural& b) {
  return Natural(boost::multiprecision::gcd(a.rep(), b.rep()));
}

bool is_probable_prime(const Natural& n, RandomSource& rng, int rounds) {
  if (n < Natural(2)) return false;
  for (unsigned p : kSmallPrimes) {
    if (n == Natural(p)) return true;
    if (Rep(n.rep() % p).is_zero()) return false;
  }
  const Natural n_minus_1 = n - Natural(1);
  Natural d = n_minus_1;
  std::size_t s = 0;
  while (!d.is_odd()) {
    d /= Natural(2);
    ++s;
  }
  // n > 251 here, so bases in [2, n-2] exist.
  const Natural span = n - Natural(3);
  for (int i = 0; i < rounds; ++i) {
    const Natural base = rng.below(span) + Natural(2);
    if (!passes_round(n, n_minus_1, d, s, base)) return false;
  }
  return true;
}

Natural gen_prime(std::size_t bits, RandomSource& rng) {
  if (bits < 4) throw DomainError("gen_prime: bits must be >= 4");
  Rep high_bit = 1;
  high_bit <<= static_cast<unsigned>(bits - 1);
  for (;;) {
    Rep candidate = rng.bits(bits).rep();
    candidate |= high_bit;
    candidate |= 1;
    Natural n(candidate);
    if (is_probable_prime(n, rng)) return n;
  }
}

Natural rand_unit(const Natural& modulus, RandomSource& rng) {
  if (modulus < Natural(3)) throw DomainError("rand_unit: modulus must be >= 3");
  const Natural span = modulus - Natural(2);
  for (int attempt = 0; attempt < kUnitSamplingAttempts; ++attempt) {
    Natural v = rng.below(span) + Natural(2);
    if (gcd(v, modulus) == Natural(1)) return v;
  }
  throw SamplingExhausted("rand_unit: no unit found in attempt budget");
}

}  // namespace epay
