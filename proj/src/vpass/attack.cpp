#include "epay/vpass.hpp"

#include <numeric>

namespace epay::vpass {

MultiplierRecovery attack_eq1(const Observation& first, const Observation& second, Digit z,
                              std::size_t index) {
  if (z < 2 || z > kMaxAlphabet) throw DomainError("alphabet size must be in [2, 65536]");
  for (const Observation* o : {&first, &second}) {
    if (o->salt.size() != o->submitted.size()) throw DomainError("observation lengths differ");
    if (index >= o->salt.size()) throw DomainError("digit index out of range");
  }
  const unsigned long long zw = z;
  const auto dy = (zw + second.salt[index] % zw - first.salt[index] % zw) % zw;
  const auto dk = (zw + second.submitted[index] % zw - first.submitted[index] % zw) % zw;
  if (dy == 0) throw NoInformation("equal salt digits reveal nothing about the multiplier");

  MultiplierRecovery out;
  out.kind = std::gcd(dy, zw) == 1 ? MultiplierRecovery::Kind::kUnique
                                   : MultiplierRecovery::Kind::kAmbiguous;
  for (Digit a : units(z)) {
    if (a * dy % zw == dk) out.candidates.push_back(a);
  }
  return out;
}

Digit impersonate_eq1(Digit observed_k, Digit observed_y, Digit live_y, Digit a, Digit z) {
  const long long zl = z;
  long long digit = (static_cast<long long>(observed_k) +
                     static_cast<long long>(a) * (static_cast<long long>(live_y) - observed_y)) %
                    zl;
  if (digit < 0) digit += zl;
  return static_cast<Digit>(digit);
}

std::vector<Digit> consistent_a_set(const std::vector<Observation>& observations, Digit z) {
  if (z > kMaxEnumeratedAlphabet) throw ResourceLimit("consistent_a_set enumerates only Z <= 16");
  if (z < 2) throw DomainError("alphabet size must be >= 2");
  for (const Observation& o : observations) {
    if (o.salt.size() == 0 || o.submitted.size() == 0) throw DomainError("empty observation");
  }

  // Each observation has its own free constant, so "exists c_1..c_m" splits
  // into one independent search per observation.
  std::vector<Digit> out;
  for (Digit a : units(z)) {
    bool consistent = false;
    for (Digit x1 = 0; x1 < z && !consistent; ++x1) {
      for (Digit x2 = 0; x2 < z && !consistent; ++x2) {
        bool all = true;
        for (const Observation& o : observations) {
          bool some_c = false;
          for (Digit c = 0; c < z && !some_c; ++c) {
            some_c = (a * x1 + o.salt[0] + x2 + c) % z == o.submitted[0];
          }
          if (!some_c) {
            all = false;
            break;
          }
        }
        consistent = all;
      }
    }
    if (consistent) out.push_back(a);
  }
  return out;
}

}  // namespace epay::vpass
