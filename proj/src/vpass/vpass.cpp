#include "epay/vpass.hpp"

#include <numeric>

namespace epay::vpass {

namespace {

using Wide = unsigned long long;

void check_alphabet(Digit z) {
  if (z < 2 || z > kMaxAlphabet) throw DomainError("alphabet size must be in [2, 65536]");
}

void check_multiplier(Digit a, Digit z) {
  if (a == 0 || a >= z) throw DomainError("multiplier must be in [1, Z)");
  if (std::gcd(a, z) != 1) throw DomainError("multiplier and alphabet are not coprime");
}

template <class Tag>
void check_digits(const DigitString<Tag>& s, Digit z, const char* what) {
  for (Digit d : s.digits) {
    if (d >= z) throw DomainError(std::string(what) + ": digit outside alphabet");
  }
}

void check_pair(const FixedPassword& x, const Salt& y, Digit z) {
  if (x.size() != y.size()) throw DomainError("password and salt lengths differ");
  check_digits(x, z, "fixed password");
  check_digits(y, z, "salt");
}

// Unchecked forward recurrence shared by derive_eq2 and verify.
void chain_eq2(const FixedPassword& x, const Salt& y, Wide a, Wide z, Wide c, std::vector<Digit>& k) {
  const std::size_t n = x.size();
  k.resize(n);
  k[0] = static_cast<Digit>((a * x[0] + y[0] + x[1] + c) % z);
  for (std::size_t i = 1; i < n; ++i) {
    k[i] = static_cast<Digit>((a * k[i - 1] + y[i] + x[i] + c) % z);
  }
}

// (lhs - rhs) mod z for values already reduced mod z.
Wide sub_mod(Wide lhs, Wide rhs, Wide z) { return (lhs + z - rhs % z) % z; }

}  // namespace

VirtualFunction VirtualFunction::linear(Digit a, Digit c, Digit z) {
  check_alphabet(z);
  check_multiplier(a, z);
  if (c >= z) throw DomainError("constant must be in [0, Z)");
  return VirtualFunction(Variant::kLinear, a, c, z);
}

VirtualFunction VirtualFunction::randomized(Digit a, Digit z) {
  check_alphabet(z);
  check_multiplier(a, z);
  return VirtualFunction(Variant::kRandomizedLinear, a, std::nullopt, z);
}

DynamicPassword derive_eq1(const FixedPassword& x, const Salt& y, const VirtualFunction& f) {
  if (f.variant() != Variant::kLinear) throw DomainError("derive_eq1 needs a linear function");
  const Wide z = f.z();
  check_pair(x, y, f.z());
  DynamicPassword k;
  k.digits.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    k.digits.push_back(static_cast<Digit>((f.a() * (Wide{x[i]} + y[i]) + *f.c()) % z));
  }
  return k;
}

DynamicPassword derive_eq2(const FixedPassword& x, const Salt& y, const VirtualFunction& f, Digit c) {
  if (f.variant() != Variant::kRandomizedLinear) {
    throw DomainError("derive_eq2 needs a randomized linear function");
  }
  check_pair(x, y, f.z());
  if (x.size() < 2) throw DomainError("derive_eq2 needs at least two digits");
  if (c >= f.z()) throw DomainError("session constant must be in [0, Z)");
  DynamicPassword k;
  chain_eq2(x, y, f.a(), f.z(), c, k.digits);
  return k;
}

FixedPassword invert_eq2(const DynamicPassword& k, const Salt& y, Digit a, Digit z, Digit c) {
  check_alphabet(z);
  check_multiplier(a, z);
  if (c >= z) throw DomainError("session constant must be in [0, Z)");
  if (k.size() != y.size()) throw DomainError("dynamic password and salt lengths differ");
  if (k.size() < 2) throw DomainError("invert_eq2 needs at least two digits");
  check_digits(k, z, "dynamic password");
  check_digits(y, z, "salt");

  const std::size_t n = k.size();
  const Wide zw = z;
  FixedPassword x;
  x.digits.assign(n, 0);
  for (std::size_t i = n; i-- > 1;) {
    const Wide carried = (Wide{a} * k[i - 1] + y[i] + c) % zw;
    x.digits[i] = static_cast<Digit>(sub_mod(k[i], carried, zw));
  }
  const Wide rest = (Wide{y[0]} + x[1] + c) % zw;
  x.digits[0] = static_cast<Digit>(Wide{inverse_mod(a, z)} * sub_mod(k[0], rest, zw) % zw);
  return x;
}

bool verify(const FixedPassword& x, const VirtualFunction& f, const Salt& y,
            const DynamicPassword& submitted) {
  if (f.variant() != Variant::kRandomizedLinear) {
    throw DomainError("verify needs a randomized linear function");
  }
  check_pair(x, y, f.z());
  if (submitted.size() != x.size()) throw DomainError("submitted length differs from password");
  if (x.size() < 2) throw DomainError("verify needs at least two digits");

  std::vector<Digit> candidate;
  bool accepted = false;
  // Every candidate is evaluated; work does not depend on which c matches.
  for (Digit c = 0; c < f.z(); ++c) {
    chain_eq2(x, y, f.a(), f.z(), c, candidate);
    accepted |= candidate == submitted.digits;
  }
  return accepted;
}

bool verify_by_inversion(const FixedPassword& x, const VirtualFunction& f, const Salt& y,
                         const DynamicPassword& submitted) {
  if (f.variant() != Variant::kRandomizedLinear) {
    throw DomainError("verify needs a randomized linear function");
  }
  check_pair(x, y, f.z());
  if (submitted.size() != x.size()) throw DomainError("submitted length differs from password");
  for (Digit d : submitted.digits) {
    if (d >= f.z()) return false;
  }
  for (Digit u = 0; u < f.z(); ++u) {
    if (invert_eq2(submitted, y, f.a(), f.z(), u) == x) return true;
  }
  return false;
}

}  // namespace epay::vpass
