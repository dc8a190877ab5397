#include "epay/limitpay.hpp"

#include <fstream>

namespace epay::limitpay {

using nlohmann::json;

namespace {

constexpr std::string_view kSnapshotHeader = "LPAY1";

template <class Tag>
vpass::DigitString<Tag> digits_from(const json& j, vpass::Digit z) {
  return vpass::parse<Tag>(j.get<std::string>(), z);
}

std::string_view status_name(AccountStatus s) { return s == AccountStatus::kActive ? "active" : "frozen"; }

AccountStatus status_from(const std::string& s) {
  if (s == "active") return AccountStatus::kActive;
  if (s == "frozen") return AccountStatus::kFrozen;
  throw DomainError("unknown account status " + s);
}

CredentialState credential_state_from(const std::string& s) {
  for (auto st : {CredentialState::kActive, CredentialState::kExhausted, CredentialState::kRevoked,
                  CredentialState::kExpired}) {
    if (to_string(st) == s) return st;
  }
  throw DomainError("unknown credential state " + s);
}

DeclineReason reason_from(const std::string& s) {
  for (auto r : {DeclineReason::kUnknownCredential, DeclineReason::kExpired, DeclineReason::kRevoked,
                 DeclineReason::kOverLimit, DeclineReason::kInsufficientFunds}) {
    if (to_string(r) == s) return r;
  }
  throw DomainError("unknown decline reason " + s);
}

Account& account_at(ServiceState& state, const std::string& id) {
  const auto it = state.accounts.find(id);
  if (it == state.accounts.end()) throw DomainError("event names unknown account " + id);
  return it->second;
}

TempCredential& credential_at(ServiceState& state, const std::string& id) {
  const auto it = state.credentials.find(id);
  if (it == state.credentials.end()) throw DomainError("event names unknown credential " + id);
  return it->second;
}

json account_to_json(const Account& a) {
  return {{"id", a.id},
          {"x", vpass::render(a.fixed_password)},
          {"a", a.vfunc.a()},
          {"z", a.vfunc.z()},
          {"balance", a.balance},
          {"limit", a.limit},
          {"status", status_name(a.status)}};
}

Account account_from_json(const json& j) {
  const auto z = j.at("z").get<vpass::Digit>();
  return Account{j.at("id").get<std::string>(),
                 digits_from<vpass::FixedPasswordTag>(j.at("x"), z),
                 vpass::VirtualFunction::randomized(j.at("a").get<vpass::Digit>(), z),
                 j.at("balance").get<Cents>(),
                 j.at("limit").get<Cents>(),
                 status_from(j.at("status").get<std::string>())};
}

json credential_to_json(const TempCredential& c) {
  return {{"id", c.id},
          {"account", c.account_id},
          {"random_number", vpass::render(c.random_number)},
          {"temp_password", vpass::render(c.temp_password)},
          {"allowance", c.allowance},
          {"remaining", c.remaining},
          {"issued", c.issued},
          {"expires", c.expires},
          {"state", to_string(c.state)}};
}

TempCredential credential_from_json(const json& j, vpass::Digit z) {
  TempCredential c;
  c.id = j.at("id").get<std::string>();
  c.account_id = j.at("account").get<std::string>();
  c.random_number = digits_from<vpass::SaltTag>(j.at("random_number"), z);
  c.temp_password = digits_from<vpass::DynamicPasswordTag>(j.at("temp_password"), z);
  c.allowance = j.at("allowance").get<Cents>();
  c.remaining = j.at("remaining").get<Cents>();
  c.issued = j.at("issued").get<Timestamp>();
  c.expires = j.at("expires").get<Timestamp>();
  c.state = credential_state_from(j.at("state").get<std::string>());
  return c;
}

json payment_to_json(const PaymentRecord& p) {
  json j = {{"credential", p.credential_id},
            {"merchant", p.merchant},
            {"amount", p.amount},
            {"ts", p.timestamp},
            {"approved", p.outcome.approved}};
  if (p.outcome.reason) j["reason"] = to_string(*p.outcome.reason);
  return j;
}

PaymentRecord payment_from_json(const json& j, Timestamp ts) {
  PaymentRecord p;
  p.credential_id = j.at("credential").get<std::string>();
  p.merchant = j.at("merchant").get<std::string>();
  p.amount = j.at("amount").get<Cents>();
  p.timestamp = ts;
  p.outcome.approved = j.at("approved").get<bool>();
  if (j.contains("reason")) p.outcome.reason = reason_from(j.at("reason").get<std::string>());
  return p;
}

}  // namespace

std::string_view to_string(ServiceError::Code code) {
  switch (code) {
    case ServiceError::Code::kConflict:
      return "conflict";
    case ServiceError::Code::kAuthFailed:
      return "auth-failed";
    case ServiceError::Code::kInsufficientFunds:
      return "insufficient-funds";
    case ServiceError::Code::kNoLimitSet:
      return "no-limit-set";
    case ServiceError::Code::kFrozen:
      return "frozen";
    case ServiceError::Code::kNotFound:
      return "not-found";
  }
  return "unknown";
}

std::string_view to_string(DeclineReason reason) {
  switch (reason) {
    case DeclineReason::kUnknownCredential:
      return "unknown-credential";
    case DeclineReason::kExpired:
      return "expired";
    case DeclineReason::kRevoked:
      return "revoked";
    case DeclineReason::kOverLimit:
      return "over-limit";
    case DeclineReason::kInsufficientFunds:
      return "insufficient-funds";
  }
  return "unknown";
}

std::string_view to_string(CredentialState state) {
  switch (state) {
    case CredentialState::kActive:
      return "active";
    case CredentialState::kExhausted:
      return "exhausted";
    case CredentialState::kRevoked:
      return "revoked";
    case CredentialState::kExpired:
      return "expired";
  }
  return "unknown";
}

void apply_event(ServiceState& state, const JournalRecord& record) {
  const json& p = record.payload;
  const std::string& kind = record.kind;

  if (kind == "register") {
    Account account = account_from_json(p);
    if (state.accounts.contains(account.id)) throw DomainError("duplicate registration");
    const std::string id = account.id;
    state.accounts.emplace(id, std::move(account));
  } else if (kind == "limit") {
    account_at(state, p.at("account").get<std::string>()).limit = p.at("limit").get<Cents>();
  } else if (kind == "freeze") {
    account_at(state, p.at("account").get<std::string>()).status =
        p.at("frozen").get<bool>() ? AccountStatus::kFrozen : AccountStatus::kActive;
  } else if (kind == "issue") {
    const Account& owner = account_at(state, p.at("account").get<std::string>());
    TempCredential c = credential_from_json(p, owner.vfunc.z());
    if (state.credentials.contains(c.id)) throw DomainError("duplicate credential id");
    const std::string id = c.id;
    state.credentials.emplace(id, std::move(c));
  } else if (kind == "payment") {
    PaymentRecord payment = payment_from_json(p, record.ts);
    if (payment.outcome.approved) {
      TempCredential& c = credential_at(state, payment.credential_id);
      Account& a = account_at(state, c.account_id);
      if (c.state != CredentialState::kActive || payment.amount > c.remaining ||
          payment.amount > a.balance) {
        throw DomainError("approved payment violates credential bounds");
      }
      c.remaining -= payment.amount;
      a.balance -= payment.amount;
      if (c.remaining == 0) c.state = CredentialState::kExhausted;
    } else if (payment.outcome.reason == DeclineReason::kExpired) {
      TempCredential& c = credential_at(state, payment.credential_id);
      if (c.state == CredentialState::kActive) c.state = CredentialState::kExpired;
    }
    state.payments.push_back(std::move(payment));
  } else if (kind == "revoke") {
    TempCredential& c = credential_at(state, p.at("credential").get<std::string>());
    if (c.state == CredentialState::kActive) c.state = CredentialState::kRevoked;
  } else if (kind == "auth-failure") {
    ++state.audit_failures;
  } else {
    throw DomainError("unknown event kind " + kind);
  }
}

ServiceState journal_replay(const std::vector<JournalRecord>& records) {
  ServiceState state;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].seq != i + 1) {
      throw JournalCorrupt(i, "expected sequence " + std::to_string(i + 1) + ", found " +
                                  std::to_string(records[i].seq));
    }
    try {
      apply_event(state, records[i]);
    } catch (const JournalCorrupt&) {
      throw;
    } catch (const std::exception& e) {
      throw JournalCorrupt(i, e.what());
    }
  }
  return state;
}

ServiceState journal_replay(const std::filesystem::path& path) { return journal_replay(Journal::load(path)); }

json state_to_json(const ServiceState& state) {
  json accounts = json::array();
  for (const auto& [id, a] : state.accounts) accounts.push_back(account_to_json(a));
  json credentials = json::array();
  for (const auto& [id, c] : state.credentials) credentials.push_back(credential_to_json(c));
  json payments = json::array();
  for (const auto& p : state.payments) payments.push_back(payment_to_json(p));
  return {{"accounts", accounts},
          {"credentials", credentials},
          {"payments", payments},
          {"audit_failures", state.audit_failures}};
}

ServiceState state_from_json(const json& j) {
  ServiceState state;
  for (const auto& a : j.at("accounts")) {
    Account account = account_from_json(a);
    const std::string id = account.id;
    state.accounts.emplace(id, std::move(account));
  }
  for (const auto& c : j.at("credentials")) {
    const Account& owner = account_at(state, c.at("account").get<std::string>());
    TempCredential cred = credential_from_json(c, owner.vfunc.z());
    const std::string id = cred.id;
    state.credentials.emplace(id, std::move(cred));
  }
  for (const auto& p : j.at("payments")) state.payments.push_back(payment_from_json(p, p.at("ts").get<Timestamp>()));
  state.audit_failures = j.at("audit_failures").get<std::uint64_t>();
  return state;
}

void write_snapshot(const ServiceState& state, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write snapshot " + path.string());
  out << kSnapshotHeader << '\n' << state_to_json(state).dump() << '\n';
  if (!out) throw Error("short write on snapshot " + path.string());
}

ServiceState read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read snapshot " + path.string());
  std::string header;
  std::getline(in, header);
  if (header != kSnapshotHeader) throw DomainError("snapshot: missing LPAY1 header");
  std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return state_from_json(json::parse(body));
  } catch (const json::exception& e) {
    throw DomainError(std::string("snapshot: ") + e.what());
  }
}

}  // namespace epay::limitpay
