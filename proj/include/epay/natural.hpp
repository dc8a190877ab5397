#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace epay {

/// Arbitrary-precision non-negative integer.
///
/// Thin value wrapper over a Boost cpp_int that refuses to go negative.
/// Hex and byte conversions are big-endian with no leading zeros, which is
/// the canonical form used in every file and wire record of the suite.
class Natural {
 public:
  using Rep = boost::multiprecision::cpp_int;

  Natural() = default;
  Natural(std::uint64_t value) : rep_(value) {}  // NOLINT: implicit by intent
  explicit Natural(Rep value);

  /// Parses lowercase or uppercase hex without prefix. "0" is zero.
  static Natural from_hex(std::string_view hex);
  static Natural from_bytes(std::span<const std::uint8_t> big_endian);

  std::string to_hex() const;
  std::string to_decimal() const;
  /// Minimal big-endian byte string; empty for zero.
  std::vector<std::uint8_t> to_bytes() const;

  std::size_t bit_length() const;
  bool bit(std::size_t index) const;
  bool is_zero() const { return rep_.is_zero(); }
  bool is_odd() const { return boost::multiprecision::bit_test(rep_, 0); }
  /// Throws DomainError if the value does not fit.
  std::uint64_t to_u64() const;

  const Rep& rep() const { return rep_; }

  Natural& operator+=(const Natural& rhs);
  Natural& operator-=(const Natural& rhs);  // throws DomainError on underflow
  Natural& operator*=(const Natural& rhs);
  Natural& operator/=(const Natural& rhs);
  Natural& operator%=(const Natural& rhs);

  friend Natural operator+(Natural lhs, const Natural& rhs) { return lhs += rhs; }
  friend Natural operator-(Natural lhs, const Natural& rhs) { return lhs -= rhs; }
  friend Natural operator*(Natural lhs, const Natural& rhs) { return lhs *= rhs; }
  friend Natural operator/(Natural lhs, const Natural& rhs) { return lhs /= rhs; }
  friend Natural operator%(Natural lhs, const Natural& rhs) { return lhs %= rhs; }

  friend bool operator==(const Natural& a, const Natural& b) { return a.rep_ == b.rep_; }
  friend std::strong_ordering operator<=>(const Natural& a, const Natural& b) {
    const int c = a.rep_.compare(b.rep_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  Rep rep_;
};

}  // namespace epay
