#include "epay/vpass.hpp"

#include <numeric>

namespace epay::vpass {

std::vector<Digit> units(Digit z) {
  std::vector<Digit> out;
  for (Digit a = 1; a < z; ++a) {
    if (std::gcd(a, z) == 1) out.push_back(a);
  }
  return out;
}

Digit inverse_mod(Digit a, Digit z) {
  long long old_r = a % z, r = z, old_s = 1, s = 0;
  while (r != 0) {
    const long long q = old_r / r;
    old_r -= q * r;
    std::swap(old_r, r);
    old_s -= q * s;
    std::swap(old_s, s);
  }
  if (old_r != 1) throw DomainError("inverse_mod: value is not a unit");
  long long inv = old_s % static_cast<long long>(z);
  if (inv < 0) inv += z;
  return static_cast<Digit>(inv);
}

std::vector<Digit> parse_digits(std::string_view text, Digit z) {
  if (z < 2 || z > 16) throw DomainError("parse_digits: alphabet must be in [2, 16]");
  std::vector<Digit> out;
  out.reserve(text.size());
  for (char ch : text) {
    Digit d;
    if (ch >= '0' && ch <= '9') {
      d = static_cast<Digit>(ch - '0');
    } else if (ch >= 'a' && ch <= 'f') {
      d = static_cast<Digit>(ch - 'a' + 10);
    } else if (ch >= 'A' && ch <= 'F') {
      d = static_cast<Digit>(ch - 'A' + 10);
    } else {
      throw DomainError("parse_digits: not a digit");
    }
    if (d >= z) throw DomainError("parse_digits: digit outside alphabet");
    out.push_back(d);
  }
  return out;
}

std::string render_digits(const std::vector<Digit>& digits) {
  static constexpr char kChars[] = "0123456789abcdef";
  std::string out;
  out.reserve(digits.size());
  for (Digit d : digits) {
    if (d >= 16) throw DomainError("render_digits: digit outside base-16 rendering");
    out.push_back(kChars[d]);
  }
  return out;
}

}  // namespace epay::vpass
