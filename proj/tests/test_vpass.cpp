#include "doctest.h"

#include "epay/random.hpp"
#include "epay/vpass.hpp"

#include "json.hpp"

#include <fstream>
#include <set>

using namespace epay;
using namespace epay::vpass;

namespace {

template <class Tag>
DigitString<Tag> random_digits(RandomSource& rng, std::size_t n, Digit z) {
  DigitString<Tag> s;
  for (std::size_t i = 0; i < n; ++i) s.digits.push_back(static_cast<Digit>(rng.below(z)));
  return s;
}

Digit random_unit(RandomSource& rng, Digit z) {
  const auto u = units(z);
  return u[rng.below(u.size())];
}

// Enumerates every digit string of length n over [0, z).
template <class Tag, class Fn>
void for_each_string(std::size_t n, Digit z, Fn&& fn) {
  DigitString<Tag> s;
  s.digits.assign(n, 0);
  for (;;) {
    fn(s);
    std::size_t i = 0;
    while (i < n && ++s.digits[i] == z) s.digits[i++] = 0;
    if (i == n) return;
  }
}

}  // namespace

TEST_CASE("digit parsing and rendering") {
  CHECK(parse_digits("0429", 10) == std::vector<Digit>{0, 4, 2, 9});
  CHECK(parse_digits("aF0", 16) == std::vector<Digit>{10, 15, 0});
  CHECK_THROWS_AS(parse_digits("12x", 10), DomainError);
  CHECK_THROWS_AS(parse_digits("9", 8), DomainError);
  CHECK_THROWS_AS(parse_digits("1", 17), DomainError);
  CHECK(render_digits({10, 0, 3}) == "a03");
  CHECK(render(parse<SaltTag>("5701", 10)) == "5701");
}

TEST_CASE("virtual function construction") {
  CHECK_THROWS_AS(VirtualFunction::linear(2, 0, 10), DomainError);
  CHECK_THROWS_AS(VirtualFunction::linear(3, 10, 10), DomainError);
  CHECK_THROWS_AS(VirtualFunction::randomized(0, 10), DomainError);
  CHECK_THROWS_AS(VirtualFunction::randomized(10, 10), DomainError);
  CHECK_THROWS_AS(VirtualFunction::randomized(1, 1), DomainError);
  const auto lin = VirtualFunction::linear(3, 4, 10);
  CHECK(lin.c() == 4u);
  CHECK_FALSE(VirtualFunction::randomized(3, 10).c().has_value());
  CHECK(units(10) == std::vector<Digit>{1, 3, 7, 9});
  CHECK(inverse_mod(3, 10) == 7);
  CHECK_THROWS_AS(inverse_mod(5, 10), DomainError);
}

TEST_CASE("derive_eq1") {
  const auto f = VirtualFunction::linear(3, 4, 10);
  CHECK(derive_eq1(FixedPassword{1}, Salt{5}, f) == DynamicPassword{2});
  CHECK(derive_eq1(FixedPassword{1, 1}, Salt{5, 8}, f) == DynamicPassword{2, 1});

  SeededRandom rng(1);
  const auto additive = VirtualFunction::linear(1, 0, 10);
  for (int i = 0; i < 100; ++i) {
    const auto x = random_digits<FixedPasswordTag>(rng, 5, 10);
    const auto y = random_digits<SaltTag>(rng, 5, 10);
    const auto k = derive_eq1(x, y, additive);
    for (std::size_t d = 0; d < 5; ++d) CHECK(k[d] == (x[d] + y[d]) % 10);
  }
  CHECK_THROWS_AS(derive_eq1(FixedPassword{1, 2}, Salt{5}, f), DomainError);
  CHECK_THROWS_AS(derive_eq1(FixedPassword{1}, Salt{5}, VirtualFunction::randomized(3, 10)),
                  DomainError);
  CHECK_THROWS_AS(derive_eq1(FixedPassword{11}, Salt{5}, f), DomainError);
}

TEST_CASE("derive_eq2 golden vectors") {
  // Frozen from tests/oracles/vpass_oracle.py.
  const auto f = VirtualFunction::randomized(3, 10);
  const FixedPassword x{1, 2};
  const Salt y{5, 7};
  CHECK(derive_eq2(x, y, f, 4) == DynamicPassword{4, 5});
  CHECK(derive_eq2(x, y, f, 5) == DynamicPassword{5, 9});

  std::set<DynamicPassword> outputs;
  std::set<Digit> first_digits;
  for (Digit c = 0; c < 10; ++c) {
    const auto k = derive_eq2(x, y, f, c);
    outputs.insert(k);
    first_digits.insert(k[0]);
  }
  CHECK(outputs.size() == 10);
  CHECK(first_digits.size() == 10);

  CHECK_THROWS_AS(derive_eq2(FixedPassword{1}, Salt{5}, f, 0), DomainError);
  CHECK_THROWS_AS(derive_eq2(x, y, f, 10), DomainError);
  CHECK_THROWS_AS(derive_eq2(x, Salt{5}, f, 0), DomainError);
  CHECK_THROWS_AS(derive_eq2(x, y, VirtualFunction::linear(3, 4, 10), 0), DomainError);
}

TEST_CASE("derive_eq2 shared golden file") {
  std::ifstream in(EPAY_GOLDEN_DIR "/derive_eq2.json");
  REQUIRE(in);
  const auto cases = nlohmann::json::parse(in).at("cases");
  REQUIRE(cases.size() == 100);
  for (const auto& c : cases) {
    const auto z = c.at("z").get<Digit>();
    const auto f = VirtualFunction::randomized(c.at("a").get<Digit>(), z);
    const auto x = parse<FixedPasswordTag>(c.at("x").get<std::string>(), z);
    const auto y = parse<SaltTag>(c.at("y").get<std::string>(), z);
    const auto k = derive_eq2(x, y, f, c.at("c").get<Digit>());
    CHECK(render(k) == c.at("k").get<std::string>());
    CHECK(verify(x, f, y, k));
  }
}

TEST_CASE("invert_eq2") {
  CHECK(invert_eq2(DynamicPassword{4, 5}, Salt{5, 7}, 3, 10, 4) == FixedPassword{1, 2});
  // Wrong constant lands on a different preimage (oracle: [1, 1]).
  CHECK(invert_eq2(DynamicPassword{4, 5}, Salt{5, 7}, 3, 10, 5) == FixedPassword{1, 1});
  CHECK_THROWS_AS(invert_eq2(DynamicPassword{4, 5}, Salt{5, 7}, 2, 10, 4), DomainError);

  SUBCASE("round trip on random instances") {
    SeededRandom rng(2);
    for (int i = 0; i < 10000; ++i) {
      const Digit z = static_cast<Digit>(2 + rng.below(15));
      const Digit a = random_unit(rng, z);
      const std::size_t n = 2 + rng.below(8);
      const auto x = random_digits<FixedPasswordTag>(rng, n, z);
      const auto y = random_digits<SaltTag>(rng, n, z);
      const Digit c = static_cast<Digit>(rng.below(z));
      const auto k = derive_eq2(x, y, VirtualFunction::randomized(a, z), c);
      REQUIRE(invert_eq2(k, y, a, z, c) == x);
    }
  }
}

TEST_CASE("derive_eq2 is a bijection on [0,Z)^n for Z=5") {
  for (std::size_t n : {2u, 3u}) {
    for (Digit a : units(5)) {
      for (Digit c = 0; c < 5; ++c) {
        for_each_string<SaltTag>(n, 5, [&](const Salt& y) {
          std::set<DynamicPassword> images;
          for_each_string<FixedPasswordTag>(n, 5, [&](const FixedPassword& x) {
            images.insert(derive_eq2(x, y, VirtualFunction::randomized(a, 5), c));
          });
          CHECK(images.size() == (n == 2 ? 25u : 125u));
        });
      }
    }
  }
}

TEST_CASE("verify") {
  const auto f = VirtualFunction::randomized(3, 10);
  const FixedPassword x{1, 2};
  const Salt y{5, 7};
  CHECK(verify(x, f, y, DynamicPassword{4, 5}));
  CHECK_FALSE(verify(x, f, y, DynamicPassword{4, 6}));
  CHECK_FALSE(verify(x, f, y, DynamicPassword{4, 12}));
  CHECK_THROWS_AS(verify(x, f, y, DynamicPassword{4, 5, 1}), DomainError);

  SUBCASE("completeness for every constant") {
    SeededRandom rng(3);
    for (int i = 0; i < 500; ++i) {
      const Digit z = static_cast<Digit>(2 + rng.below(15));
      const auto g = VirtualFunction::randomized(random_unit(rng, z), z);
      const auto xx = random_digits<FixedPasswordTag>(rng, 6, z);
      const auto yy = random_digits<SaltTag>(rng, 6, z);
      for (Digit c = 0; c < z; ++c) REQUIRE(verify(xx, g, yy, derive_eq2(xx, yy, g, c)));
    }
  }

  SUBCASE("exactly Z acceptable passwords, and inversion route agrees") {
    SeededRandom rng(4);
    for (int trial = 0; trial < 5; ++trial) {
      const auto g = VirtualFunction::randomized(random_unit(rng, 10), 10);
      const auto xx = random_digits<FixedPasswordTag>(rng, 3, 10);
      const auto yy = random_digits<SaltTag>(rng, 3, 10);
      int accepted = 0;
      for_each_string<DynamicPasswordTag>(3, 10, [&](const DynamicPassword& k) {
        const bool forward = verify(xx, g, yy, k);
        CHECK(forward == verify_by_inversion(xx, g, yy, k));
        accepted += forward ? 1 : 0;
      });
      CHECK(accepted == 10);
    }
  }
}

TEST_CASE("attack_eq1") {
  // Ground truth a=3, c=4, x_i=1.
  const Observation first{Salt{5}, DynamicPassword{2}};
  const Observation second{Salt{8}, DynamicPassword{1}};
  const auto rec = attack_eq1(first, second, 10, 0);
  CHECK(rec.kind == MultiplierRecovery::Kind::kUnique);
  CHECK(rec.candidates == std::vector<Digit>{3});

  CHECK_THROWS_AS(attack_eq1(first, Observation{Salt{5}, DynamicPassword{7}}, 10, 0), NoInformation);

  // dy = 5 shares a factor with 10; oracle says {1, 3, 7, 9}.
  const auto f = VirtualFunction::linear(3, 4, 10);
  const Observation third{Salt{0}, derive_eq1(FixedPassword{1}, Salt{0}, f)};
  const auto amb = attack_eq1(first, third, 10, 0);
  CHECK(amb.kind == MultiplierRecovery::Kind::kAmbiguous);
  CHECK(amb.candidates == std::vector<Digit>{1, 3, 7, 9});

  CHECK_THROWS_AS(attack_eq1(first, second, 10, 1), DomainError);
}

TEST_CASE("impersonate_eq1") {
  CHECK(impersonate_eq1(2, 5, 2, 3, 10) == 3);
  CHECK(impersonate_eq1(2, 5, 5, 3, 10) == 2);

  SeededRandom rng(5);
  for (int i = 0; i < 10000; ++i) {
    const Digit z = static_cast<Digit>(2 + rng.below(30));
    const Digit a = random_unit(rng, z);
    const Digit c = static_cast<Digit>(rng.below(z));
    const auto f = VirtualFunction::linear(a, c, z);
    const auto x = random_digits<FixedPasswordTag>(rng, 1, z);
    const auto y = random_digits<SaltTag>(rng, 1, z);
    const auto live = random_digits<SaltTag>(rng, 1, z);
    const Digit k = derive_eq1(x, y, f)[0];
    REQUIRE(impersonate_eq1(k, y[0], live[0], a, z) == derive_eq1(x, live, f)[0]);
  }
}

TEST_CASE("consistent_a_set") {
  CHECK(consistent_a_set({}, 10) == units(10));
  CHECK_THROWS_AS(consistent_a_set({}, 17), ResourceLimit);

  const std::vector<Observation> obs{{Salt{7, 1}, DynamicPassword{0, 3}},
                                     {Salt{6, 2}, DynamicPassword{6, 9}}};
  CHECK(consistent_a_set(obs, 10) == std::vector<Digit>{1, 3, 7, 9});

  SUBCASE("arbitrary fabricated pairs never shrink the set") {
    SeededRandom rng(6);
    for (int i = 0; i < 100; ++i) {
      const Digit z = static_cast<Digit>(2 + rng.below(15));
      std::vector<Observation> fabricated;
      for (int j = 0; j < 2; ++j) {
        fabricated.push_back({random_digits<SaltTag>(rng, 2, z),
                              random_digits<DynamicPasswordTag>(rng, 2, z)});
      }
      REQUIRE(consistent_a_set(fabricated, z) == units(z));
    }
  }
}
