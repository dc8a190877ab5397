#include "epay/natural.hpp"

#include "epay/errors.hpp"

#include <algorithm>
#include <cctype>
#include <iterator>

namespace epay {

namespace mp = boost::multiprecision;

Natural::Natural(Rep value) : rep_(std::move(value)) {
  if (rep_.sign() < 0) throw DomainError("Natural: negative value");
}

Natural Natural::from_hex(std::string_view hex) {
  if (hex.empty()) throw DomainError("Natural: empty hex string");
  Rep value;
  for (char ch : hex) {
    unsigned digit;
    if (ch >= '0' && ch <= '9') {
      digit = static_cast<unsigned>(ch - '0');
    } else if (ch >= 'a' && ch <= 'f') {
      digit = static_cast<unsigned>(ch - 'a' + 10);
    } else if (ch >= 'A' && ch <= 'F') {
      digit = static_cast<unsigned>(ch - 'A' + 10);
    } else {
      throw DomainError("Natural: bad hex digit");
    }
    value <<= 4;
    value |= digit;
  }
  return Natural(std::move(value));
}

Natural Natural::from_bytes(std::span<const std::uint8_t> big_endian) {
  Rep value;
  if (!big_endian.empty()) {
    mp::import_bits(value, big_endian.begin(), big_endian.end(), 8, true);
  }
  return Natural(std::move(value));
}

std::string Natural::to_hex() const {
  if (rep_.is_zero()) return "0";
  std::string out = rep_.str(0, std::ios_base::hex);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string Natural::to_decimal() const { return rep_.str(); }

std::vector<std::uint8_t> Natural::to_bytes() const {
  std::vector<std::uint8_t> out;
  if (rep_.is_zero()) return out;
  mp::export_bits(rep_, std::back_inserter(out), 8, true);
  return out;
}

std::size_t Natural::bit_length() const {
  if (rep_.is_zero()) return 0;
  return static_cast<std::size_t>(mp::msb(rep_)) + 1;
}

bool Natural::bit(std::size_t index) const {
  return mp::bit_test(rep_, static_cast<unsigned>(index));
}

std::uint64_t Natural::to_u64() const {
  if (bit_length() > 64) throw DomainError("Natural: value exceeds 64 bits");
  return rep_.convert_to<std::uint64_t>();
}

Natural& Natural::operator+=(const Natural& rhs) {
  rep_ += rhs.rep_;
  return *this;
}

Natural& Natural::operator-=(const Natural& rhs) {
  if (rep_ < rhs.rep_) throw DomainError("Natural: subtraction underflow");
  rep_ -= rhs.rep_;
  return *this;
}

Natural& Natural::operator*=(const Natural& rhs) {
  rep_ *= rhs.rep_;
  return *this;
}

Natural& Natural::operator/=(const Natural& rhs) {
  if (rhs.is_zero()) throw DomainError("Natural: division by zero");
  rep_ /= rhs.rep_;
  return *this;
}

Natural& Natural::operator%=(const Natural& rhs) {
  if (rhs.is_zero()) throw DomainError("Natural: modulo by zero");
  rep_ %= rhs.rep_;
  return *this;
}

}  // namespace epay
