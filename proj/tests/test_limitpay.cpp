#include "doctest.h"

#include "epay/limitpay.hpp"

#include <atomic>
#include <filesystem>
#include <numeric>
#include <set>
#include <thread>
#include <tuple>
#include <type_traits>

using namespace epay;
using namespace epay::limitpay;

namespace {

constexpr Timestamp kT0 = 1'800'000'000;

template <class Tag>
vpass::DigitString<Tag> random_digits(RandomSource& rng, std::size_t n, vpass::Digit z) {
  vpass::DigitString<Tag> s;
  for (std::size_t i = 0; i < n; ++i) s.digits.push_back(static_cast<vpass::Digit>(rng.below(z)));
  return s;
}

Authentication login(const SecretCode& secret, RandomSource& rng) {
  const auto z = secret.vfunc.z();
  const auto salt = random_digits<vpass::SaltTag>(rng, secret.fixed_password.size(), z);
  const auto c = static_cast<vpass::Digit>(rng.below(z));
  return {salt, vpass::derive_eq2(secret.fixed_password, salt, secret.vfunc, c)};
}

Authentication bad_login(const SecretCode& secret, RandomSource& rng) {
  Authentication auth = login(secret, rng);
  const auto z = secret.vfunc.z();
  // A response is rejected iff it differs from every candidate; shift until that holds.
  for (vpass::Digit shift = 1; shift < z; ++shift) {
    Authentication probe = auth;
    for (auto& d : probe.response.digits) d = static_cast<vpass::Digit>((d + shift) % z);
    if (!vpass::verify(secret.fixed_password, secret.vfunc, probe.salt, probe.response)) return probe;
  }
  FAIL("could not build a rejected response");
  return auth;
}

CredentialPresentation present(const TempCredential& c) { return {c.account_id, c.random_number, c.temp_password}; }

void check_replay(const LimitPayService& svc) {
  CHECK(journal_replay(svc.journal().records()) == svc.snapshot());
}

struct Fixture {
  std::string id = "alice";
  SeededRandom rng{42};
  LimitPayService svc;
  SecretCode secret;

  explicit Fixture(Cents balance = 500'00, Config config = {})
      : svc(config), secret(svc.register_account(id, balance, rng, kT0).secret) {}

  Authentication auth() { return login(secret, rng); }
  TempCredential issue(Cents limit, Timestamp now = kT0) {
    svc.set_limit(id, auth(), limit, now);
    return svc.issue_temp_credential(id, auth(), rng, now);
  }
};

}  // namespace

TEST_CASE("payment boundary carries no real secrets") {
  using Method = decltype(&LimitPayService::authorize_payment);
  static_assert(std::is_same_v<Method, PaymentOutcome (LimitPayService::*)(const CredentialPresentation&,
                                                                           const std::string&, Cents, Timestamp)>);
  CredentialPresentation p;
  auto& [account, random_number, temp_password] = p;
  static_assert(std::is_same_v<std::remove_cvref_t<decltype(account)>, std::string>);
  static_assert(std::is_same_v<std::remove_cvref_t<decltype(random_number)>, vpass::Salt>);
  static_assert(std::is_same_v<std::remove_cvref_t<decltype(temp_password)>, vpass::DynamicPassword>);
  CHECK(sizeof(p) == sizeof(std::string) + sizeof(vpass::Salt) + sizeof(vpass::DynamicPassword));
}

TEST_CASE("registration") {
  Fixture f;
  const auto account = *f.svc.find_account("alice");
  CHECK(account.limit == 0);
  CHECK(account.balance == 500'00);
  CHECK(account.status == AccountStatus::kActive);
  CHECK(account.fixed_password.size() == 6);
  CHECK(std::gcd(account.vfunc.a(), account.vfunc.z()) == 1);
  CHECK(account.vfunc.variant() == vpass::Variant::kRandomizedLinear);

  const auto records = f.svc.journal().records();
  REQUIRE(records.size() == 1);
  CHECK(records[0].kind == "register");
  CHECK(records[0].seq == 1);

  SUBCASE("duplicate id conflicts") {
    try {
      f.svc.register_account("alice", 1, f.rng, kT0);
      FAIL("expected conflict");
    } catch (const ServiceError& e) {
      CHECK(e.code() == ServiceError::Code::kConflict);
    }
    CHECK(f.svc.journal().records().size() == 1);
  }
  SUBCASE("new account declines everything") {
    CHECK_THROWS_AS(f.svc.issue_temp_credential("alice", f.auth(), f.rng, kT0), ServiceError);
    const auto random_number = random_digits<vpass::SaltTag>(f.rng, 6, 10);
    const CredentialPresentation p{"alice", random_number,
                                   vpass::derive_eq2(f.secret.fixed_password, random_number, f.secret.vfunc, 0)};
    const auto out = f.svc.authorize_payment(p, "shop", 1, kT0);
    CHECK_FALSE(out.approved);
    CHECK(out.reason == DeclineReason::kUnknownCredential);
  }
  SUBCASE("independent draws") {
    std::set<std::pair<std::string, vpass::Digit>> seen;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
      SeededRandom rng(seed);
      LimitPayService svc;
      const auto reg = svc.register_account("u", 0, rng, kT0);
      seen.emplace(vpass::render(reg.secret.fixed_password), reg.secret.vfunc.a());
    }
    CHECK(seen.size() == 64);
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(f.svc.register_account("", 0, f.rng, kT0), DomainError);
    CHECK_THROWS_AS(f.svc.register_account("bob", -1, f.rng, kT0), DomainError);
  }
  check_replay(f.svc);
}

TEST_CASE("set_limit") {
  Fixture f;
  CHECK(f.svc.set_limit("alice", f.auth(), 100'00, kT0).limit == 100'00);
  try {
    f.svc.set_limit("alice", f.auth(), 600'00, kT0);
    FAIL("expected insufficient funds");
  } catch (const ServiceError& e) {
    CHECK(e.code() == ServiceError::Code::kInsufficientFunds);
  }
  const auto before = f.svc.journal().records().size();
  try {
    f.svc.set_limit("alice", bad_login(f.secret, f.rng), 50'00, kT0);
    FAIL("expected auth failure");
  } catch (const ServiceError& e) {
    CHECK(e.code() == ServiceError::Code::kAuthFailed);
  }
  const auto records = f.svc.journal().records();
  REQUIRE(records.size() == before + 1);
  CHECK(records.back().kind == "auth-failure");
  CHECK(f.svc.snapshot().audit_failures == 1);
  CHECK(f.svc.find_account("alice")->limit == 100'00);

  SUBCASE("wrong-length response is an auth failure") {
    Authentication auth = f.auth();
    auth.response.digits.pop_back();
    CHECK_THROWS_AS(f.svc.set_limit("alice", auth, 1, kT0), ServiceError);
  }
  SUBCASE("unknown account") {
    try {
      f.svc.set_limit("nobody", f.auth(), 1, kT0);
      FAIL("expected not found");
    } catch (const ServiceError& e) {
      CHECK(e.code() == ServiceError::Code::kNotFound);
    }
  }
  check_replay(f.svc);
}

TEST_CASE("issue_temp_credential") {
  Fixture f;
  const auto cred = f.issue(100'00);
  CHECK(vpass::verify(f.secret.fixed_password, f.secret.vfunc, cred.random_number, cred.temp_password));
  CHECK(cred.remaining == 100'00);
  CHECK(cred.allowance == 100'00);
  CHECK(cred.expires == kT0 + 24 * 60 * 60);
  CHECK(cred.state == CredentialState::kActive);
  CHECK(cred.temp_password.size() == f.secret.fixed_password.size());

  const auto second = f.svc.issue_temp_credential("alice", f.auth(), f.rng, kT0);
  CHECK(second.random_number != cred.random_number);
  CHECK(second.id != cred.id);

  SUBCASE("limit change does not touch issued credentials") {
    f.svc.set_limit("alice", f.auth(), 300'00, kT0);
    CHECK(f.svc.find_credential(cred.id)->remaining == 100'00);
  }
  SUBCASE("frozen account") {
    f.svc.set_frozen("alice", true, kT0);
    try {
      f.svc.issue_temp_credential("alice", f.auth(), f.rng, kT0);
      FAIL("expected frozen");
    } catch (const ServiceError& e) {
      CHECK(e.code() == ServiceError::Code::kFrozen);
    }
    CHECK_FALSE(f.svc.authorize_payment(present(cred), "shop", 1, kT0).approved);
  }
  SUBCASE("no limit") {
    f.svc.set_limit("alice", f.auth(), 0, kT0);
    try {
      f.svc.issue_temp_credential("alice", f.auth(), f.rng, kT0);
      FAIL("expected no limit");
    } catch (const ServiceError& e) {
      CHECK(e.code() == ServiceError::Code::kNoLimitSet);
    }
  }
  SUBCASE("limit above a drained balance") {
    f.svc.authorize_payment(present(cred), "shop", 100'00, kT0);
    f.svc.set_limit("alice", f.auth(), 400'00, kT0);
    f.svc.issue_temp_credential("alice", f.auth(), f.rng, kT0);
    CHECK(f.svc.find_account("alice")->balance == 400'00);
    f.svc.set_limit("alice", f.auth(), 400'00, kT0);
    const auto big = f.svc.issue_temp_credential("alice", f.auth(), f.rng, kT0);
    CHECK(f.svc.authorize_payment(present(big), "shop", 50'00, kT0).approved);
    try {
      f.svc.issue_temp_credential("alice", f.auth(), f.rng, kT0);
      FAIL("expected insufficient funds");
    } catch (const ServiceError& e) {
      CHECK(e.code() == ServiceError::Code::kInsufficientFunds);
    }
  }
  SUBCASE("random numbers stay distinct in a tiny space") {
    Config tiny{2, 2, 3600};
    Fixture g(500'00, tiny);
    g.svc.set_limit("alice", g.auth(), 1, kT0);
    std::set<std::string> seen;
    for (int i = 0; i < 4; ++i) seen.insert(vpass::render(g.svc.issue_temp_credential("alice", g.auth(), g.rng, kT0).random_number));
    CHECK(seen.size() == 4);
    CHECK_THROWS_AS(g.svc.issue_temp_credential("alice", g.auth(), g.rng, kT0), ResourceLimit);
    check_replay(g.svc);
  }
  check_replay(f.svc);
}

TEST_CASE("authorize_payment") {
  Fixture f;
  const auto cred = f.issue(100'00);
  const auto p = present(cred);

  SUBCASE("over limit") {
    CHECK(f.svc.authorize_payment(p, "shop", 60'00, kT0).approved);
    const auto out = f.svc.authorize_payment(p, "shop", 50'00, kT0);
    CHECK_FALSE(out.approved);
    CHECK(out.reason == DeclineReason::kOverLimit);
    CHECK(f.svc.find_credential(cred.id)->remaining == 40'00);
    CHECK(f.svc.find_account("alice")->balance == 440'00);
  }
  SUBCASE("exact remaining exhausts") {
    CHECK(f.svc.authorize_payment(p, "shop", 100'00, kT0).approved);
    CHECK(f.svc.find_credential(cred.id)->state == CredentialState::kExhausted);
    CHECK(f.svc.authorize_payment(p, "shop", 1, kT0).reason == DeclineReason::kOverLimit);
  }
  SUBCASE("expired") {
    const auto out = f.svc.authorize_payment(p, "shop", 1, cred.expires);
    CHECK(out.reason == DeclineReason::kExpired);
    CHECK(f.svc.find_credential(cred.id)->state == CredentialState::kExpired);
    CHECK(f.svc.authorize_payment(p, "shop", 1, kT0).reason == DeclineReason::kExpired);
  }
  SUBCASE("forged temp password") {
    CredentialPresentation forged = p;
    const auto z = f.secret.vfunc.z();
    bool rejected = false;
    for (vpass::Digit shift = 1; shift < z && !rejected; ++shift) {
      forged = p;
      for (auto& d : forged.temp_password.digits) d = static_cast<vpass::Digit>((d + shift) % z);
      rejected = !vpass::verify(f.secret.fixed_password, f.secret.vfunc, forged.random_number, forged.temp_password);
    }
    REQUIRE(rejected);
    CHECK(f.svc.authorize_payment(forged, "shop", 1, kT0).reason == DeclineReason::kUnknownCredential);
  }
  SUBCASE("unknown account or random number") {
    CredentialPresentation other = p;
    other.account_id = "mallory";
    CHECK(f.svc.authorize_payment(other, "shop", 1, kT0).reason == DeclineReason::kUnknownCredential);
    other = p;
    other.random_number.digits.pop_back();
    CHECK(f.svc.authorize_payment(other, "shop", 1, kT0).reason == DeclineReason::kUnknownCredential);
  }
  SUBCASE("balance drained by another credential") {
    f.svc.set_limit("alice", f.auth(), 450'00, kT0);
    const auto big = f.svc.issue_temp_credential("alice", f.auth(), f.rng, kT0);
    CHECK(f.svc.authorize_payment(present(big), "shop", 450'00, kT0).approved);
    const auto out = f.svc.authorize_payment(p, "shop", 60'00, kT0);
    CHECK(out.reason == DeclineReason::kInsufficientFunds);
    CHECK(f.svc.authorize_payment(p, "shop", 50'00, kT0).approved);
    CHECK(f.svc.find_account("alice")->balance == 0);
  }
  SUBCASE("nonpositive amounts") {
    const auto before = f.svc.journal().last_seq();
    CHECK_THROWS_AS(f.svc.authorize_payment(p, "shop", 0, kT0), DomainError);
    CHECK_THROWS_AS(f.svc.authorize_payment(p, "shop", -5, kT0), DomainError);
    CHECK(f.svc.journal().last_seq() == before);
    f.svc.authorize_payment(p, "shop", 1, kT0);
  }
  CHECK(f.svc.journal().records().back().kind == "payment");
  CHECK_FALSE(f.svc.snapshot().payments.empty());
  check_replay(f.svc);
}

TEST_CASE("revoke_credential") {
  Fixture f;
  const auto cred = f.issue(100'00);
  const auto revoked = f.svc.revoke_credential("alice", f.auth(), cred.id, kT0);
  CHECK(revoked.state == CredentialState::kRevoked);
  CHECK(f.svc.journal().records().back().kind == "revoke");
  CHECK(f.svc.authorize_payment(present(cred), "shop", 1, kT0).reason == DeclineReason::kRevoked);

  SUBCASE("exhausted stays unspendable") {
    const auto c2 = f.svc.issue_temp_credential("alice", f.auth(), f.rng, kT0);
    CHECK(f.svc.authorize_payment(present(c2), "shop", 100'00, kT0).approved);
    CHECK(f.svc.revoke_credential("alice", f.auth(), c2.id, kT0).state == CredentialState::kExhausted);
    CHECK_FALSE(f.svc.authorize_payment(present(c2), "shop", 1, kT0).approved);
  }
  SUBCASE("unknown or foreign id") {
    CHECK_THROWS_AS(f.svc.revoke_credential("alice", f.auth(), "cr-nope", kT0), ServiceError);
    const auto bob = f.svc.register_account("bob", 10'00, f.rng, kT0).secret;
    CHECK_THROWS_AS(f.svc.revoke_credential("bob", login(bob, f.rng), cred.id, kT0), ServiceError);
  }
  check_replay(f.svc);
}

TEST_CASE("journal replay") {
  const auto dir = std::filesystem::temp_directory_path() / "epay_test_limitpay";
  std::filesystem::create_directories(dir);
  const auto path = dir / "journal.log";
  std::filesystem::remove(path);

  SeededRandom rng(7);
  LimitPayService svc;
  svc.journal().attach_file(path);
  const auto secret = svc.register_account("alice", 500'00, rng, kT0).secret;
  svc.set_limit("alice", login(secret, rng), 100'00, kT0 + 1);
  const auto cred = svc.issue_temp_credential("alice", login(secret, rng), rng, kT0 + 2);
  svc.authorize_payment(present(cred), "shop", 30'00, kT0 + 3);
  std::vector<ServiceState> states;
  for (std::size_t i = 0; i <= svc.journal().records().size(); ++i) {
    const auto all = svc.journal().records();
    states.push_back(journal_replay(std::vector<JournalRecord>(all.begin(), all.begin() + static_cast<long>(i))));
  }
  svc.authorize_payment(present(cred), "shop", 90'00, kT0 + 4);
  svc.revoke_credential("alice", login(secret, rng), cred.id, kT0 + 5);

  CHECK(journal_replay(path) == svc.snapshot());
  check_replay(svc);

  SUBCASE("truncated journal replays the prefix") {
    const auto all = Journal::load(path);
    for (std::size_t i = 0; i < states.size(); ++i) {
      CHECK(journal_replay(std::vector<JournalRecord>(all.begin(), all.begin() + static_cast<long>(i))) == states[i]);
    }
  }
  SUBCASE("sequence gap") {
    auto all = Journal::load(path);
    all.erase(all.begin() + 2);
    try {
      journal_replay(all);
      FAIL("expected corrupt");
    } catch (const JournalCorrupt& e) {
      CHECK(e.index() == 2);
    }
  }
  SUBCASE("non-monotone sequence") {
    auto all = Journal::load(path);
    std::swap(all[3], all[4]);
    try {
      journal_replay(all);
      FAIL("expected corrupt");
    } catch (const JournalCorrupt& e) {
      CHECK(e.index() == 3);
    }
  }
  SUBCASE("garbled line") {
    std::ofstream(path, std::ios::app) << "{\"seq\":\n";
    try {
      Journal::load(path);
      FAIL("expected corrupt");
    } catch (const JournalCorrupt& e) {
      CHECK(e.index() == 6);
    }
  }
  SUBCASE("resumed service continues numbering") {
    LimitPayService resumed(Config{}, Journal::load(path));
    CHECK(resumed.snapshot() == svc.snapshot());
    resumed.set_frozen("alice", true, kT0 + 6);
    CHECK(resumed.journal().last_seq() == 7);
    check_replay(resumed);
  }
  SUBCASE("snapshot round trip") {
    const auto snap = dir / "state.snap";
    write_snapshot(svc.snapshot(), snap);
    CHECK(read_snapshot(snap) == svc.snapshot());
    std::ofstream(snap, std::ios::trunc) << "LPAY0\n{}\n";
    CHECK_THROWS_AS(read_snapshot(snap), DomainError);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("loss bound over adversarial payment sequences") {
  std::size_t approvals = 0;
  for (std::uint64_t seq = 0; seq < 10'000; ++seq) {
    SeededRandom rng(mix_seed(0x105ebdULL, seq));
    LimitPayService svc(Config{4, 10, 3600});
    const Cents balance = 1 + static_cast<Cents>(rng.below(1'000'00));
    const auto secret = svc.register_account("victim", balance, rng, kT0).secret;
    const Cents limit = 1 + static_cast<Cents>(rng.below(static_cast<std::uint64_t>(balance)));
    svc.set_limit("victim", login(secret, rng), limit, kT0);
    const auto stolen = svc.issue_temp_credential("victim", login(secret, rng), rng, kT0);

    Cents stolen_total = 0;
    Cents all_total = 0;
    const auto steps = 1 + rng.below(24);
    for (std::uint64_t s = 0; s < steps; ++s) {
      const auto move = rng.below(10);
      if (move == 0) {
        // Owner raises the limit mid-attack; the stolen credential must not grow.
        const auto now_balance = svc.find_account("victim")->balance;
        if (now_balance > 0) {
          svc.set_limit("victim", login(secret, rng), 1 + static_cast<Cents>(rng.below(static_cast<std::uint64_t>(now_balance))), kT0);
        }
        continue;
      }
      const Cents amount = 1 + static_cast<Cents>(rng.below(static_cast<std::uint64_t>(2 * limit)));
      const Timestamp when = kT0 + static_cast<Timestamp>(rng.below(4000));
      CredentialPresentation p = present(stolen);
      if (move == 1) p.temp_password.digits[rng.below(p.temp_password.size())] = static_cast<vpass::Digit>(rng.below(10));
      if (svc.authorize_payment(p, "m" + std::to_string(rng.below(5)), amount, when).approved) {
        stolen_total += amount;
        all_total += amount;
        ++approvals;
      }
    }
    REQUIRE(stolen_total <= limit);
    REQUIRE(svc.find_account("victim")->balance == balance - all_total);
    REQUIRE(svc.find_credential(stolen.id)->remaining == limit - stolen_total);
    REQUIRE(journal_replay(svc.journal().records()) == svc.snapshot());
  }
  CHECK(approvals > 1000);
}

TEST_CASE("concurrent payments on one credential respect the allowance") {
  Fixture f(1'000'00);
  const auto cred = f.issue(10'00);
  const auto p = present(cred);
  std::atomic<Cents> approved{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 50; ++i) {
        const Cents amount = 1 + (t * 50 + i) % 7;
        if (f.svc.authorize_payment(p, "shop", amount, kT0).approved) approved += amount;
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(approved.load() <= 10'00);
  CHECK(approved.load() > 9'90);
  CHECK(f.svc.find_credential(cred.id)->remaining == 10'00 - approved.load());
  CHECK(f.svc.find_account("alice")->balance == 1'000'00 - approved.load());
  const auto records = f.svc.journal().records();
  for (std::size_t i = 0; i < records.size(); ++i) CHECK(records[i].seq == i + 1);
  check_replay(f.svc);
}
