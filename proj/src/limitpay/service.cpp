#include "epay/limitpay.hpp"

#include "epay/digest.hpp"

namespace epay::limitpay {

using nlohmann::json;

namespace {

constexpr std::size_t kSaltAttempts = 1024;

template <class Tag>
vpass::DigitString<Tag> random_digits(RandomSource& rng, std::size_t n, vpass::Digit z) {
  vpass::DigitString<Tag> out;
  out.digits.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.digits.push_back(static_cast<vpass::Digit>(rng.below(z)));
  return out;
}

bool verifies(const Account& account, const vpass::Salt& salt, const vpass::DynamicPassword& response) {
  try {
    return vpass::verify(account.fixed_password, account.vfunc, salt, response);
  } catch (const DomainError&) {
    // Wrong length or out-of-alphabet salt: same answer as a wrong password.
    return false;
  }
}

Config validated(Config config) {
  if (config.password_length < 2) throw DomainError("password length must be >= 2");
  if (config.alphabet < 2 || config.alphabet > 16) throw DomainError("alphabet must be in [2, 16]");
  if (config.credential_lifetime <= 0) throw DomainError("credential lifetime must be positive");
  return config;
}

}  // namespace

LimitPayService::LimitPayService(Config config) : config_(validated(config)) {}

LimitPayService::LimitPayService(Config config, std::vector<JournalRecord> records)
    : config_(validated(config)), journal_(records), state_(journal_replay(records)) {}

std::mutex& LimitPayService::account_mutex(const std::string& id) {
  std::lock_guard lock(locks_mutex_);
  auto& slot = account_locks_[id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

std::optional<Account> LimitPayService::copy_account(const std::string& id) const {
  std::shared_lock lock(state_mutex_);
  const auto it = state_.accounts.find(id);
  if (it == state_.accounts.end()) return std::nullopt;
  return it->second;
}

std::optional<Account> LimitPayService::find_account(const std::string& id) const { return copy_account(id); }

std::optional<TempCredential> LimitPayService::find_credential(const std::string& id) const {
  std::shared_lock lock(state_mutex_);
  const auto it = state_.credentials.find(id);
  if (it == state_.credentials.end()) return std::nullopt;
  return it->second;
}

ServiceState LimitPayService::snapshot() const {
  std::shared_lock lock(state_mutex_);
  return state_;
}

JournalRecord LimitPayService::commit(Timestamp ts, std::string kind, json payload) {
  std::lock_guard lock(commit_mutex_);
  JournalRecord record = journal_.append(ts, std::move(kind), std::move(payload));
  std::unique_lock state_lock(state_mutex_);
  apply_event(state_, record);
  return record;
}

bool LimitPayService::check_real_credential(const std::string& account_id, const Authentication& auth) const {
  const auto account = copy_account(account_id);
  return account && verifies(*account, auth.salt, auth.response);
}

void LimitPayService::require_auth(const std::string& account_id, const Authentication& auth,
                                   std::string_view op, Timestamp now) {
  const auto account = copy_account(account_id);
  if (!account) throw ServiceError(ServiceError::Code::kNotFound, "no such account");
  if (!verifies(*account, auth.salt, auth.response)) {
    commit(now, "auth-failure", {{"account", account_id}, {"op", op}});
    throw ServiceError(ServiceError::Code::kAuthFailed, "authentication failed");
  }
}

LimitPayService::Registration LimitPayService::register_account(const std::string& id,
                                                                 Cents initial_balance,
                                                                 RandomSource& rng, Timestamp now) {
  if (id.empty()) throw DomainError("account id must not be empty");
  if (initial_balance < 0) throw DomainError("initial balance must be >= 0");

  const auto unit_choices = vpass::units(config_.alphabet);
  const vpass::Digit a = unit_choices[rng.below(unit_choices.size())];
  SecretCode secret{random_digits<vpass::FixedPasswordTag>(rng, config_.password_length, config_.alphabet),
                    vpass::VirtualFunction::randomized(a, config_.alphabet)};

  std::lock_guard account_lock(account_mutex(id));
  if (copy_account(id)) throw ServiceError(ServiceError::Code::kConflict, "account id already registered");
  commit(now, "register",
         {{"id", id},
          {"x", vpass::render(secret.fixed_password)},
          {"a", secret.vfunc.a()},
          {"z", secret.vfunc.z()},
          {"balance", initial_balance},
          {"limit", 0},
          {"status", "active"}});
  return {*copy_account(id), std::move(secret)};
}

Account LimitPayService::set_limit(const std::string& account_id, const Authentication& auth,
                                   Cents new_limit, Timestamp now) {
  if (new_limit < 0) throw DomainError("limit must be >= 0");
  require_auth(account_id, auth, "set-limit", now);
  std::lock_guard account_lock(account_mutex(account_id));
  const Account account = *copy_account(account_id);
  if (new_limit > account.balance) {
    throw ServiceError(ServiceError::Code::kInsufficientFunds, "limit exceeds balance");
  }
  commit(now, "limit", {{"account", account_id}, {"limit", new_limit}});
  return *copy_account(account_id);
}

TempCredential LimitPayService::issue_temp_credential(const std::string& account_id,
                                                      const Authentication& auth, RandomSource& rng,
                                                      Timestamp now) {
  require_auth(account_id, auth, "issue-credential", now);
  std::lock_guard account_lock(account_mutex(account_id));
  const Account account = *copy_account(account_id);
  if (account.status == AccountStatus::kFrozen) throw ServiceError(ServiceError::Code::kFrozen, "account frozen");
  if (account.limit == 0) throw ServiceError(ServiceError::Code::kNoLimitSet, "no spending limit set");
  if (account.limit > account.balance) {
    throw ServiceError(ServiceError::Code::kInsufficientFunds, "limit exceeds current balance");
  }

  const std::size_t n = account.fixed_password.size();
  const vpass::Digit z = account.vfunc.z();
  vpass::Salt random_number;
  std::string id;
  {
    std::shared_lock lock(state_mutex_);
    // Random numbers stay unique per account so a presentation names one credential.
    auto taken = [&](const vpass::Salt& salt) {
      for (const auto& [cid, c] : state_.credentials) {
        if (c.account_id == account_id && c.random_number == salt) return true;
      }
      return false;
    };
    std::size_t attempts = 0;
    do {
      if (++attempts > kSaltAttempts) throw ResourceLimit("random number space exhausted for account");
      random_number = random_digits<vpass::SaltTag>(rng, n, z);
    } while (taken(random_number));
    do {
      id = "cr-" + bytes_to_hex(rng.bytes(8));
    } while (state_.credentials.contains(id));
  }
  const auto c = static_cast<vpass::Digit>(rng.below(z));
  const vpass::DynamicPassword temp = vpass::derive_eq2(account.fixed_password, random_number, account.vfunc, c);

  commit(now, "issue",
         {{"id", id},
          {"account", account_id},
          {"random_number", vpass::render(random_number)},
          {"temp_password", vpass::render(temp)},
          {"allowance", account.limit},
          {"remaining", account.limit},
          {"issued", now},
          {"expires", now + config_.credential_lifetime},
          {"state", "active"}});
  return *find_credential(id);
}

PaymentOutcome LimitPayService::authorize_payment(const CredentialPresentation& presentation,
                                                  const std::string& merchant, Cents amount, Timestamp now) {
  if (amount <= 0) throw DomainError("payment amount must be positive");

  auto record = [&](const std::string& credential_id, PaymentOutcome outcome) {
    json payload = {{"credential", credential_id},
                    {"merchant", merchant},
                    {"amount", amount},
                    {"approved", outcome.approved}};
    if (outcome.reason) payload["reason"] = to_string(*outcome.reason);
    commit(now, "payment", std::move(payload));
    return outcome;
  };
  const PaymentOutcome unknown{false, DeclineReason::kUnknownCredential};

  std::optional<Account> account;
  std::string credential_id;
  {
    std::shared_lock lock(state_mutex_);
    const auto acc = state_.accounts.find(presentation.account_id);
    if (acc != state_.accounts.end()) {
      account = acc->second;
      for (const auto& [cid, c] : state_.credentials) {
        if (c.account_id == presentation.account_id && c.random_number == presentation.random_number) {
          credential_id = cid;
          break;
        }
      }
    }
  }
  if (!account || credential_id.empty()) return record("", unknown);
  // The temp password is checked against the account's own secrets, not
  // against the stored copy, so a forged credential row cannot authorize.
  if (!verifies(*account, presentation.random_number, presentation.temp_password)) {
    return record("", unknown);
  }

  std::lock_guard account_lock(account_mutex(presentation.account_id));
  const TempCredential cred = *find_credential(credential_id);
  const Account current = *copy_account(presentation.account_id);

  if (cred.state == CredentialState::kRevoked || current.status == AccountStatus::kFrozen) {
    return record(credential_id, {false, DeclineReason::kRevoked});
  }
  if (cred.state == CredentialState::kExpired || now >= cred.expires) {
    return record(credential_id, {false, DeclineReason::kExpired});
  }
  if (cred.state == CredentialState::kExhausted || amount > cred.remaining) {
    return record(credential_id, {false, DeclineReason::kOverLimit});
  }
  if (amount > current.balance) {
    return record(credential_id, {false, DeclineReason::kInsufficientFunds});
  }
  return record(credential_id, {true, std::nullopt});
}

TempCredential LimitPayService::revoke_credential(const std::string& account_id, const Authentication& auth,
                                                  const std::string& credential_id, Timestamp now) {
  require_auth(account_id, auth, "revoke-credential", now);
  std::lock_guard account_lock(account_mutex(account_id));
  const auto cred = find_credential(credential_id);
  if (!cred || cred->account_id != account_id) {
    throw ServiceError(ServiceError::Code::kNotFound, "no such credential for this account");
  }
  commit(now, "revoke", {{"credential", credential_id}});
  return *find_credential(credential_id);
}

void LimitPayService::set_frozen(const std::string& account_id, bool frozen, Timestamp now) {
  std::lock_guard account_lock(account_mutex(account_id));
  if (!copy_account(account_id)) throw ServiceError(ServiceError::Code::kNotFound, "no such account");
  commit(now, "freeze", {{"account", account_id}, {"frozen", frozen}});
}

}  // namespace epay::limitpay
