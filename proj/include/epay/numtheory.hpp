#pragma once

#include "epay/errors.hpp"
#include "epay/natural.hpp"
#include "epay/random.hpp"

#include <cstddef>

namespace epay {

/// Thrown by mod_inv when the value shares a factor with the modulus.
class NotInvertible : public Error {
 public:
  explicit NotInvertible(Natural gcd)
      : Error("value is not invertible (gcd=" + gcd.to_hex() + ")"), gcd_(std::move(gcd)) {}
  const Natural& gcd() const { return gcd_; }

 private:
  Natural gcd_;
};

/// Miller-Rabin rounds used by gen_prime; error probability <= 4^-64.
inline constexpr int kMillerRabinRounds = 64;
/// Attempt budget of rand_unit.
inline constexpr int kUnitSamplingAttempts = 128;

/// base^exponent mod modulus by left-to-right square-and-multiply.
Natural mod_exp(const Natural& base, const Natural& exponent, const Natural& modulus);

/// The v in [0, modulus) with value*v = 1 (mod modulus). Throws NotInvertible.
Natural mod_inv(const Natural& value, const Natural& modulus);

Natural gcd(const Natural& a, const Natural& b);

/// Trial division by small primes, then `rounds` Miller-Rabin rounds with
/// bases drawn from rng.
bool is_probable_prime(const Natural& n, RandomSource& rng, int rounds = kMillerRabinRounds);

/// Odd probable prime of exactly `bits` bits (bits >= 4).
Natural gen_prime(std::size_t bits, RandomSource& rng);

/// Uniform unit v with 2 <= v < modulus. modulus >= 3.
Natural rand_unit(const Natural& modulus, RandomSource& rng);

}  // namespace epay
