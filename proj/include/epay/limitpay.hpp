#pragma once

#include "epay/errors.hpp"
#include "epay/random.hpp"
#include "epay/vpass.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace epay::limitpay {

/// Money is integer cents everywhere.
using Cents = std::int64_t;
/// Seconds since the Unix epoch.
using Timestamp = std::int64_t;

class ServiceError : public Error {
 public:
  enum class Code { kConflict, kAuthFailed, kInsufficientFunds, kNoLimitSet, kFrozen, kNotFound };
  ServiceError(Code code, const std::string& what) : Error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

std::string_view to_string(ServiceError::Code code);

class JournalCorrupt : public Error {
 public:
  JournalCorrupt(std::size_t index, const std::string& what)
      : Error("journal corrupt at record " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

enum class AccountStatus { kActive, kFrozen };

struct Account {
  std::string id;
  vpass::FixedPassword fixed_password;
  vpass::VirtualFunction vfunc;
  Cents balance = 0;
  Cents limit = 0;
  AccountStatus status = AccountStatus::kActive;

  friend bool operator==(const Account&, const Account&) = default;
};

/// What the bank hands the user at registration.
struct SecretCode {
  vpass::FixedPassword fixed_password;
  vpass::VirtualFunction vfunc;
};

enum class CredentialState { kActive, kExhausted, kRevoked, kExpired };

struct TempCredential {
  std::string id;
  std::string account_id;
  vpass::Salt random_number;
  vpass::DynamicPassword temp_password;
  Cents allowance = 0;
  Cents remaining = 0;
  Timestamp issued = 0;
  Timestamp expires = 0;
  CredentialState state = CredentialState::kActive;

  friend bool operator==(const TempCredential&, const TempCredential&) = default;
};

/// Proof of the real credential: a server salt and the dynamic password the
/// user derived for it.
struct Authentication {
  vpass::Salt salt;
  vpass::DynamicPassword response;
};

/// Everything a merchant forwards for a payment. No real secrets.
struct CredentialPresentation {
  std::string account_id;
  vpass::Salt random_number;
  vpass::DynamicPassword temp_password;
};

enum class DeclineReason { kUnknownCredential, kExpired, kRevoked, kOverLimit, kInsufficientFunds };

std::string_view to_string(DeclineReason reason);
std::string_view to_string(CredentialState state);

struct PaymentOutcome {
  bool approved = false;
  std::optional<DeclineReason> reason;
  friend bool operator==(const PaymentOutcome&, const PaymentOutcome&) = default;
};

struct PaymentRecord {
  std::string credential_id;  // empty when no credential matched
  std::string merchant;
  Cents amount = 0;
  Timestamp timestamp = 0;
  PaymentOutcome outcome;
  friend bool operator==(const PaymentRecord&, const PaymentRecord&) = default;
};

/// The whole service state; journal replay rebuilds exactly this.
struct ServiceState {
  std::map<std::string, Account> accounts;
  std::map<std::string, TempCredential> credentials;
  std::vector<PaymentRecord> payments;
  std::uint64_t audit_failures = 0;

  friend bool operator==(const ServiceState&, const ServiceState&) = default;
};

struct JournalRecord {
  std::uint64_t seq = 0;
  Timestamp ts = 0;
  std::string kind;
  nlohmann::json payload;

  std::string to_line() const;
  static JournalRecord from_line(std::string_view line);
};

/// Append-only event log with strictly increasing sequence numbers. When a
/// file is attached every record is written as one line and flushed.
class Journal {
 public:
  Journal() = default;
  /// Starts numbering after `records` (for resuming a replayed file).
  explicit Journal(std::vector<JournalRecord> records);

  void attach_file(const std::filesystem::path& path);
  JournalRecord append(Timestamp ts, std::string kind, nlohmann::json payload);
  std::vector<JournalRecord> records() const;
  std::uint64_t last_seq() const;

  /// Parses a journal file. Unparseable lines raise JournalCorrupt.
  static std::vector<JournalRecord> load(const std::filesystem::path& path);

 private:
  mutable std::mutex mutex_;
  std::vector<JournalRecord> records_;
  std::ofstream file_;
};

/// Rebuilds state from records. Sequence numbers must run 1, 2, 3, ...
ServiceState journal_replay(const std::vector<JournalRecord>& records);
ServiceState journal_replay(const std::filesystem::path& path);

/// Snapshot file: the line "LPAY1" followed by the state as one JSON object.
void write_snapshot(const ServiceState& state, const std::filesystem::path& path);
ServiceState read_snapshot(const std::filesystem::path& path);

nlohmann::json state_to_json(const ServiceState& state);
ServiceState state_from_json(const nlohmann::json& j);

struct Config {
  std::size_t password_length = 6;
  vpass::Digit alphabet = 10;
  Timestamp credential_lifetime = 24 * 60 * 60;
};

/// Limit-bounded account service.
///
/// Every mutation is validated, written to the journal, then applied to the
/// in-memory state through the same code path replay uses. Mutations on one
/// account are serialized by a per-account mutex; journal append and apply
/// happen together under a commit lock, so record order is apply order.
/// Dynamic-password verification runs before any lock is taken.
class LimitPayService {
 public:
  explicit LimitPayService(Config config = {});
  /// Resumes from previously journaled records.
  LimitPayService(Config config, std::vector<JournalRecord> records);

  const Config& config() const { return config_; }
  Journal& journal() { return journal_; }
  const Journal& journal() const { return journal_; }

  struct Registration {
    Account account;
    SecretCode secret;
  };

  Registration register_account(const std::string& id, Cents initial_balance, RandomSource& rng,
                                 Timestamp now);
  Account set_limit(const std::string& account_id, const Authentication& auth, Cents new_limit,
                    Timestamp now);
  TempCredential issue_temp_credential(const std::string& account_id, const Authentication& auth,
                                       RandomSource& rng, Timestamp now);
  PaymentOutcome authorize_payment(const CredentialPresentation& presentation,
                                   const std::string& merchant, Cents amount, Timestamp now);
  TempCredential revoke_credential(const std::string& account_id, const Authentication& auth,
                                   const std::string& credential_id, Timestamp now);
  void set_frozen(const std::string& account_id, bool frozen, Timestamp now);

  /// Public shape of an account: id, status, password length and alphabet.
  std::optional<Account> find_account(const std::string& id) const;
  std::optional<TempCredential> find_credential(const std::string& id) const;
  /// True iff the real credential verifies. Pure; takes only a read lock.
  bool check_real_credential(const std::string& account_id, const Authentication& auth) const;
  ServiceState snapshot() const;

 private:
  std::mutex& account_mutex(const std::string& id);
  std::optional<Account> copy_account(const std::string& id) const;
  void require_auth(const std::string& account_id, const Authentication& auth, std::string_view op,
                    Timestamp now);
  JournalRecord commit(Timestamp ts, std::string kind, nlohmann::json payload);

  Config config_;
  Journal journal_;
  ServiceState state_;
  mutable std::shared_mutex state_mutex_;
  std::mutex commit_mutex_;
  std::mutex locks_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> account_locks_;
};

/// Applies one journaled event to a state. Shared by live service and replay.
void apply_event(ServiceState& state, const JournalRecord& record);

}  // namespace epay::limitpay
