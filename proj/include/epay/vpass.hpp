#pragma once

#include "epay/errors.hpp"

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace epay::vpass {

using Digit = unsigned;

/// A digit string over the alphabet [0, Z). The tag keeps fixed passwords,
/// salts and dynamic passwords from being mixed up at call sites.
template <class Tag>
struct DigitString {
  std::vector<Digit> digits;

  DigitString() = default;
  explicit DigitString(std::vector<Digit> d) : digits(std::move(d)) {}
  DigitString(std::initializer_list<Digit> d) : digits(d) {}

  std::size_t size() const { return digits.size(); }
  Digit operator[](std::size_t i) const { return digits[i]; }
  friend bool operator==(const DigitString&, const DigitString&) = default;
  friend auto operator<=>(const DigitString&, const DigitString&) = default;
};

struct FixedPasswordTag;
struct SaltTag;
struct DynamicPasswordTag;

/// The user's remembered digits x_1..x_n (n >= 2).
using FixedPassword = DigitString<FixedPasswordTag>;
/// Server-issued challenge digits y_1..y_n.
using Salt = DigitString<SaltTag>;
/// Submitted digits k_1..k_n.
using DynamicPassword = DigitString<DynamicPasswordTag>;

enum class Variant { kLinear, kRandomizedLinear };

/// Per-user secret map parameters. Linear carries its constant c; the
/// randomized variant takes a fresh c per login.
class VirtualFunction {
 public:
  /// k_i = (a(x_i + y_i) + c) mod Z.
  static VirtualFunction linear(Digit a, Digit c, Digit z);
  /// k_1 = (a x_1 + y_1 + x_2 + c) mod Z, k_i = (a k_{i-1} + y_i + x_i + c) mod Z.
  static VirtualFunction randomized(Digit a, Digit z);

  Variant variant() const { return variant_; }
  Digit a() const { return a_; }
  Digit z() const { return z_; }
  std::optional<Digit> c() const { return c_; }

  friend bool operator==(const VirtualFunction&, const VirtualFunction&) = default;

 private:
  VirtualFunction(Variant v, Digit a, std::optional<Digit> c, Digit z)
      : variant_(v), a_(a), c_(c), z_(z) {}

  Variant variant_;
  Digit a_;
  std::optional<Digit> c_;
  Digit z_;
};

/// One login as seen by an adversary: the salt shown and the digits typed.
struct Observation {
  Salt salt;
  DynamicPassword submitted;
};

/// Largest alphabet accepted anywhere in the scheme.
inline constexpr Digit kMaxAlphabet = 1u << 16;
/// Largest alphabet consistent_a_set will enumerate.
inline constexpr Digit kMaxEnumeratedAlphabet = 16;

class NoInformation : public Error {
 public:
  using Error::Error;
};

// -- digit helpers -----------------------------------------------------------

/// Units of Z in [1, Z), ascending.
std::vector<Digit> units(Digit z);
/// Inverse of a modulo z; DomainError when gcd(a, z) != 1.
Digit inverse_mod(Digit a, Digit z);

/// Parses base-Z text (0-9, then a-f; case-insensitive). Z <= 16.
std::vector<Digit> parse_digits(std::string_view text, Digit z);
std::string render_digits(const std::vector<Digit>& digits);

template <class Tag>
DigitString<Tag> parse(std::string_view text, Digit z) {
  return DigitString<Tag>(parse_digits(text, z));
}
template <class Tag>
std::string render(const DigitString<Tag>& s) {
  return render_digits(s.digits);
}

// -- derivation and verification ---------------------------------------------

DynamicPassword derive_eq1(const FixedPassword& x, const Salt& y, const VirtualFunction& f);

DynamicPassword derive_eq2(const FixedPassword& x, const Salt& y, const VirtualFunction& f, Digit c);

/// The unique x with derive_eq2(x, y, randomized(a, z), c) == k.
FixedPassword invert_eq2(const DynamicPassword& k, const Salt& y, Digit a, Digit z, Digit c);

/// True iff some c in [0, Z) makes derive_eq2(x, y, f, c) equal `submitted`.
/// Recomputes forward once per candidate c. Throws DomainError on length
/// mismatch; out-of-alphabet submitted digits simply fail.
bool verify(const FixedPassword& x, const VirtualFunction& f, const Salt& y,
            const DynamicPassword& submitted);

/// Same decision as verify, reached by inverting `submitted` per candidate c
/// and comparing with x.
bool verify_by_inversion(const FixedPassword& x, const VirtualFunction& f, const Salt& y,
                         const DynamicPassword& submitted);

// -- adversary algebra --------------------------------------------------------

struct MultiplierRecovery {
  enum class Kind { kUnique, kAmbiguous };
  Kind kind;
  /// Units a with a * dy = dk (mod Z). One entry when kind is kUnique.
  std::vector<Digit> candidates;
};

/// Solves a (y'_i - y_i) = k'_i - k_i (mod Z) from two linear-scheme logins.
/// Throws NoInformation when y'_i = y_i.
MultiplierRecovery attack_eq1(const Observation& first, const Observation& second, Digit z,
                              std::size_t index);

/// (k_i + a (y''_i - y_i)) mod Z: the linear-scheme digit for a new salt.
Digit impersonate_eq1(Digit observed_k, Digit observed_y, Digit live_y, Digit a, Digit z);

/// Every unit a for which some (x_1, x_2) and per-observation constants c
/// reproduce all observed first digits. Exhaustive; Z <= 16.
std::vector<Digit> consistent_a_set(const std::vector<Observation>& observations, Digit z);

}  // namespace epay::vpass
