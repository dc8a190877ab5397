#include "doctest.h"

#include "epay/digest.hpp"
#include "epay/numtheory.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <map>
#include <set>

using namespace epay;

namespace {

// Plain trial division, independent of the Miller-Rabin path.
bool trial_division_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("Natural hex is canonical lowercase without leading zeros") {
  CHECK(Natural(0).to_hex() == "0");
  CHECK(Natural(255).to_hex() == "ff");
  CHECK(Natural::from_hex("000ABC").to_hex() == "abc");
  CHECK(Natural::from_hex("0").is_zero());
  CHECK_THROWS_AS(Natural::from_hex(""), DomainError);
  CHECK_THROWS_AS(Natural::from_hex("12g"), DomainError);
  CHECK_THROWS_AS(Natural(3) - Natural(4), DomainError);
  CHECK(Natural::from_bytes(Natural::from_hex("1000001").to_bytes()) == Natural(0x1000001));
}

TEST_CASE("mod_exp") {
  CHECK(mod_exp(2, 10, 1000) == Natural(24));
  CHECK(mod_exp(123456789, 0, 97) == Natural(1));
  CHECK(mod_exp(0, 0, 2) == Natural(1));
  // Frozen from tests/oracles/numcrypt_oracle.py.
  CHECK(mod_exp(7, 560, 561) == Natural(1));
  CHECK_THROWS_AS(mod_exp(3, 3, 1), DomainError);
  CHECK_THROWS_AS(mod_exp(3, 3, 0), DomainError);

  SUBCASE("agrees with boost powm on wide operands") {
    SeededRandom rng(7);
    for (int i = 0; i < 50; ++i) {
      const Natural m = rng.bits(300) + Natural(2);
      const Natural b = rng.bits(320);
      const Natural e = rng.bits(200);
      const Natural::Rep expect = boost::multiprecision::powm(b.rep(), e.rep(), m.rep());
      CHECK(mod_exp(b, e, m).rep() == expect);
    }
  }

  SUBCASE("power of a product exponent") {
    SeededRandom rng(11);
    for (int i = 0; i < 200; ++i) {
      const Natural m = Natural(rng.below(10000) + 2);
      const Natural g = Natural(rng.below(100000));
      const Natural a = Natural(rng.below(500));
      const Natural b = Natural(rng.below(500));
      CHECK(mod_exp(g, a * b, m) == mod_exp(mod_exp(g, a, m), b, m));
    }
  }
}

TEST_CASE("mod_inv") {
  CHECK(mod_inv(3, 7) == Natural(5));
  CHECK(mod_inv(1, 2) == Natural(1));
  CHECK(mod_inv(1, 1000003) == Natural(1));
  CHECK_THROWS_AS(mod_inv(3, 1), DomainError);

  try {
    mod_inv(2, 4);
    FAIL("expected NotInvertible");
  } catch (const NotInvertible& e) {
    CHECK(e.gcd() == Natural(2));
  }
  try {
    mod_inv(0, 9);
    FAIL("expected NotInvertible");
  } catch (const NotInvertible& e) {
    CHECK(e.gcd() == Natural(9));
  }

  SUBCASE("round trip") {
    SeededRandom rng(3);
    int returned = 0;
    for (int i = 0; i < 500; ++i) {
      const Natural m = rng.bits(128) + Natural(2);
      const Natural v = rng.bits(140);
      try {
        const Natural inv = mod_inv(v, m);
        CHECK(inv < m);
        CHECK(v * inv % m == Natural(1));
        ++returned;
      } catch (const NotInvertible& e) {
        CHECK(gcd(v, m) == e.gcd());
        CHECK(e.gcd() != Natural(1));
      }
    }
    CHECK(returned > 100);
  }
}

TEST_CASE("gen_prime") {
  SeededRandom any(1);
  CHECK_THROWS_AS(gen_prime(3, any), DomainError);

  SUBCASE("4-bit primes are 11 or 13") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
      SeededRandom rng(seed);
      seen.insert(gen_prime(4, rng).to_u64());
    }
    CHECK(seen == std::set<std::uint64_t>{11, 13});
  }

  SUBCASE("exact width and trial-division oracle up to 20 bits") {
    for (std::size_t bits = 4; bits <= 20; ++bits) {
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SeededRandom rng(seed * 131 + bits);
        const Natural p = gen_prime(bits, rng);
        CHECK(p.bit_length() == bits);
        CHECK(p.is_odd());
        CHECK(trial_division_prime(p.to_u64()));
      }
    }
  }

  SUBCASE("64-bit outputs pass independent Miller-Rabin and differ by seed") {
    SeededRandom a(100);
    SeededRandom b(200);
    const Natural p = gen_prime(64, a);
    const Natural q = gen_prime(64, b);
    CHECK(p.bit_length() == 64);
    CHECK(p != q);
    SeededRandom check(999);
    CHECK(is_probable_prime(p, check, 64));
    CHECK(is_probable_prime(q, check, 64));
    // Carmichael number and a semiprime are rejected.
    CHECK_FALSE(is_probable_prime(561, check));
    CHECK_FALSE(is_probable_prime(Natural(4294967291ULL) * Natural(4294967279ULL), check));
  }
}

TEST_CASE("rand_unit") {
  SeededRandom any(1);
  CHECK_THROWS_AS(rand_unit(2, any), DomainError);

  SUBCASE("never a multiple of 5 or 11 mod 55") {
    SeededRandom rng(5);
    for (int i = 0; i < 2000; ++i) {
      const std::uint64_t v = rand_unit(55, rng).to_u64();
      CHECK(v >= 2);
      CHECK(v < 55);
      CHECK(v % 5 != 0);
      CHECK(v % 11 != 0);
    }
  }

  SUBCASE("mod 7 is always in 2..6") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      SeededRandom rng(seed);
      const std::uint64_t v = rand_unit(7, rng).to_u64();
      CHECK(v >= 2);
      CHECK(v <= 6);
    }
  }

  SUBCASE("chi-squared uniformity over the sampled units of 55") {
    // Support: units of 55 in [2, 55), i.e. 40 units minus the excluded 1.
    SeededRandom rng(42);
    std::map<std::uint64_t, int> counts;
    constexpr int kDraws = 10000;
    for (int i = 0; i < kDraws; ++i) ++counts[rand_unit(55, rng).to_u64()];
    CHECK(counts.size() == 39);
    const double expected = static_cast<double>(kDraws) / 39.0;
    double chi2 = 0;
    for (const auto& [value, count] : counts) {
      chi2 += (count - expected) * (count - expected) / expected;
    }
    // chi2 critical value, 38 degrees of freedom, p = 0.01.
    CHECK(chi2 < 61.162);
  }

  SUBCASE("pathological modulus exhausts") {
    // A source stuck on zero always proposes 2, never a unit of 1024.
    struct EvenSource final : RandomSource {
      std::uint64_t next_u64() override { return 0; }
    } even;
    CHECK_THROWS_AS(rand_unit(1024, even), SamplingExhausted);
  }
}

TEST_CASE("hash_to_int") {
  const Natural n = Natural::from_hex(
      "ffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffff"
      "ffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffdc7");
  const std::string msg = "EC1|2026-01-01|5000|" + std::string(32, '0');
  // Frozen from tests/oracles/numcrypt_oracle.py (hashlib SHA-256).
  CHECK(hash_to_int(msg, n).to_hex() ==
        "dcb982b3ff3f29eab07891f6ee09b564bd2a68624e992a5fa4bdc6b86b844a60");
  CHECK(hash_to_int("abc", 55) == Natural(41));
  CHECK(hash_to_int(msg, n) == hash_to_int(msg, n));
  CHECK_THROWS_AS(hash_to_int("abc", 2), DomainError);

  for (int i = 0; i < 300; ++i) {
    const std::string m = "message-" + std::to_string(i);
    const Natural h = hash_to_int(m, 55);
    CHECK(h >= Natural(2));
    CHECK(h < Natural(55));
    CHECK(gcd(h, 55) == Natural(1));
  }
  // Only unit above 1 of 4 is 3.
  CHECK(hash_to_int("x", 4) == Natural(3));
}

TEST_CASE("hex bytes") {
  CHECK(bytes_to_hex(hex_to_bytes("00ff10")) == "00ff10");
  CHECK_THROWS_AS(hex_to_bytes("abc"), DomainError);
  CHECK_THROWS_AS(hex_to_bytes("zz"), DomainError);
}
