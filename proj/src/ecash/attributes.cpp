#include "epay/ecash.hpp"

#include <charconv>
#include <cstdio>

namespace epay::ecash {

namespace {

bool is_leap(int year) { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; }

unsigned days_in_month(int year, unsigned month) {
  static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return month == 2 && is_leap(year) ? 29 : kDays[month - 1];
}

template <class T>
T parse_number(std::string_view text, const char* what) {
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    throw DomainError(std::string("bad ") + what);
  }
  return value;
}

bool is_lower_hex(std::string_view s) {
  for (char ch : s) {
    if (!((ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f'))) return false;
  }
  return true;
}

}  // namespace

Date Date::parse(std::string_view iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') throw DomainError("date must be YYYY-MM-DD");
  Date d;
  d.year = parse_number<int>(iso.substr(0, 4), "year");
  d.month = parse_number<unsigned>(iso.substr(5, 2), "month");
  d.day = parse_number<unsigned>(iso.substr(8, 2), "day");
  if (d.month < 1 || d.month > 12) throw DomainError("month out of range");
  if (d.day < 1 || d.day > days_in_month(d.year, d.month)) throw DomainError("day out of range");
  return d;
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
  return buf;
}

std::string CoinAttributes::encode() const {
  if (serial.size() != 32 || !is_lower_hex(serial)) {
    throw DomainError("coin serial must be 32 lowercase hex characters");
  }
  return "EC1|" + expiry.iso() + "|" + std::to_string(value_cents) + "|" + serial;
}

CoinAttributes CoinAttributes::decode(std::string_view encoding) {
  const std::string_view full = encoding;
  if (encoding.substr(0, 4) != "EC1|") throw DomainError("coin attributes: bad tag");
  encoding.remove_prefix(4);
  const auto bar1 = encoding.find('|');
  if (bar1 == std::string_view::npos) throw DomainError("coin attributes: missing value");
  const auto bar2 = encoding.find('|', bar1 + 1);
  if (bar2 == std::string_view::npos) throw DomainError("coin attributes: missing serial");
  CoinAttributes attrs;
  attrs.expiry = Date::parse(encoding.substr(0, bar1));
  attrs.value_cents = parse_number<std::uint64_t>(encoding.substr(bar1 + 1, bar2 - bar1 - 1), "value");
  attrs.serial = std::string(encoding.substr(bar2 + 1));
  if (attrs.encode() != full) {
    throw DomainError("coin attributes: non-canonical encoding");
  }
  return attrs;
}

std::string CoinAttributes::random_serial(RandomSource& rng) { return bytes_to_hex(rng.bytes(16)); }

}  // namespace epay::ecash
