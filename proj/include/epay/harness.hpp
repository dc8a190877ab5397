#pragma once

#include "epay/digest.hpp"
#include "epay/ecash.hpp"
#include "epay/errors.hpp"
#include "epay/limitpay.hpp"
#include "epay/random.hpp"
#include "epay/vpass.hpp"

#include "json.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

namespace epay::harness {

using limitpay::Timestamp;

// -- wire format ---------------------------------------------------------------

inline constexpr std::string_view kWireVersion = "VP1";

/// One encrypted message. Text form: {"v":"VP1","kind":..,"iv":hex,"ct":hex}.
struct WireRecord {
  std::string version{kWireVersion};
  std::string kind;
  Bytes iv;
  Bytes ciphertext;

  std::string to_text() const;
  /// Throws ChannelCorrupt on anything that is not a well-formed record.
  static WireRecord from_text(std::string_view text);
  friend bool operator==(const WireRecord&, const WireRecord&) = default;
};

struct WireMessage {
  std::string kind;
  std::string payload;
  friend bool operator==(const WireMessage&, const WireMessage&) = default;
};

/// RC5-32/12/16-CBC over payload || HMAC-SHA256 tag. The iv is the RC5
/// encryption of the big-endian counter, so distinct counters give distinct
/// ivs. The channel key is 16 bytes.
WireRecord wire_encode(std::string_view kind, std::string_view payload, const Bytes& channel_key,
                       std::uint64_t counter);
/// Throws ChannelCorrupt on bad version, length, padding or tag.
WireMessage wire_decode(const WireRecord& record, const Bytes& channel_key);

/// Holds a key and a monotone counter. `counter_base` separates the two
/// directions of one channel.
class WireChannel {
 public:
  WireChannel(Bytes key, std::uint64_t counter_base);
  WireRecord seal(std::string_view kind, std::string_view payload);
  WireMessage open(const WireRecord& record) const { return wire_decode(record, key_); }

 private:
  Bytes key_;
  std::atomic<std::uint64_t> counter_;
};

// -- login sessions ------------------------------------------------------------

class SessionClosed : public Error {
 public:
  using Error::Error;
};

enum class SessionState { kOpen, kSucceeded, kFailed, kExpired };
std::string_view to_string(SessionState state);

struct LoginSession {
  std::string id;
  std::string account_id;
  vpass::Salt salt;
  Timestamp issued_at = 0;
  SessionState state = SessionState::kOpen;
};

/// Server-side login challenges. Each session is closed by its first use.
class LoginManager {
 public:
  LoginManager(limitpay::LimitPayService& accounts, RandomSource& rng, Timestamp ttl = 5 * 60);

  /// Fresh uniform salt for an existing account; NotFound otherwise.
  LoginSession open(const std::string& account_id, Timestamp now);
  /// Verifies against the account's secrets and closes the session.
  SessionState submit(const std::string& session_id, const vpass::DynamicPassword& submitted, Timestamp now);
  /// Closes an open session for `account_id` and hands back its salt so the
  /// caller can authenticate one account operation with it. The caller
  /// reports the result through settle().
  vpass::Salt claim(const std::string& session_id, const std::string& account_id, Timestamp now);
  void settle(const std::string& session_id, bool succeeded);

  std::optional<LoginSession> find(const std::string& session_id) const;
  Timestamp ttl() const { return ttl_; }

 private:
  limitpay::LimitPayService& accounts_;
  RandomSource& rng_;
  Timestamp ttl_;
  mutable std::mutex mutex_;
  std::map<std::string, LoginSession> sessions_;
};

// -- adversary simulation ------------------------------------------------------

enum class AdversaryKind { kPhisher, kKeylogger, kShoulderSurfer, kMultiObserver };
enum class Scheme { kEq1, kEq2 };

std::string_view to_string(AdversaryKind kind);
std::string_view to_string(Scheme scheme);
AdversaryKind adversary_kind_from(std::string_view name);
Scheme scheme_from(std::string_view name);

struct AdversaryModel {
  AdversaryKind kind = AdversaryKind::kPhisher;
  /// Logins observed before the attack.
  std::size_t observations = 2;
};

struct SimulationConfig {
  AdversaryModel model;
  Scheme scheme = Scheme::kEq1;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  vpass::Digit alphabet = 10;
  std::size_t length = 6;
};

struct RateEstimate {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double rate = 0;
  double low = 0;
  double high = 0;
  bool contains(double p) const { return low <= p && p <= high; }
};

/// Wilson score interval; z = 1.96 gives 95%.
RateEstimate wilson(std::uint64_t successes, std::uint64_t trials, double z = 1.96);

struct SimulationReport {
  SimulationConfig config;
  /// The modeled adversary: Eq1 solves for a from digit differences; Eq2
  /// intersects first-digit constraints and guesses the rest.
  RateEstimate impersonation;
  /// Eq2 only: forging from a full observed transcript by reusing its
  /// constant, with a taken from the all-digit constraints.
  std::optional<RateEstimate> chain_forgery;
  /// Success rate of one uniform guess under the scheme.
  double baseline_rate = 0;
  /// Z / 2^n, for comparison.
  double printed_rate = 0;
  /// Trials in which the multiplier candidates narrowed to one value.
  std::uint64_t unique_multiplier = 0;
  double mean_candidates = 0;
  /// Same statistics for the all-digit Eq2 constraints.
  std::uint64_t chain_unique_multiplier = 0;
  double chain_mean_candidates = 0;

  nlohmann::json to_json() const;
};

/// Every trial draws from its own stream mix_seed(seed, trial), so reports
/// are reproducible and independent of evaluation order.
SimulationReport simulate_adversary(const SimulationConfig& config);

/// Units a for which the all-digit Eq2 constraints of every observation pair
/// agree: k_i - a k_{i-1} - y_i differs between two logins by a constant.
std::vector<vpass::Digit> chain_consistent_a(const std::vector<vpass::Observation>& observations,
                                             vpass::Digit z);
/// The Eq2 password for `live_salt` with the constant of `seen`, given a.
vpass::DynamicPassword chain_forge(const vpass::Observation& seen, const vpass::Salt& live_salt,
                                   vpass::Digit a, vpass::Digit z);

// -- JSON codecs ---------------------------------------------------------------

nlohmann::json to_json(const ecash::PublicKey& key);
ecash::PublicKey public_key_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ecash::BankKeys& keys);
ecash::BankKeys bank_keys_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ecash::Coin& coin);
ecash::Coin coin_from_json(const nlohmann::json& j);

ecash::Date date_from_timestamp(Timestamp t);

// -- service -------------------------------------------------------------------

struct Response {
  int status = 200;
  std::string body;
};

using Clock = std::function<Timestamp()>;
using LogSink = std::function<void(std::string_view)>;

Timestamp system_clock_now();

struct ServiceOptions {
  limitpay::Config limits;
  Timestamp session_ttl = 5 * 60;
  /// Empty disables encrypted bodies.
  Bytes channel_key;
  /// Empty keeps everything in memory. Otherwise holds journal.log and
  /// spent.log, which are replayed on start.
  std::filesystem::path state_dir;
};

/// The bank's web service: accounts, login sessions, payments and e-cash.
/// Bodies are JSON. A body that is a VP1 record is decrypted first and the
/// response is sealed the same way.
class EpayService {
 public:
  EpayService(ServiceOptions options, ecash::BankKeys bank, std::unique_ptr<RandomSource> rng, Clock clock,
              LogSink log = {});
  ~EpayService();

  Response handle(std::string_view method, std::string_view path, std::string_view body);

  limitpay::LimitPayService& accounts() { return *accounts_; }
  LoginManager& sessions() { return *sessions_; }
  const ecash::PublicKey& bank_key() const { return public_key_; }
  std::size_t spent_coins() const;

 private:
  struct Withdrawal;
  class LockedRandom;

  Response dispatch(std::string_view method, std::string_view path, const nlohmann::json& body);
  Response authenticated(const std::string& account_id, const nlohmann::json& body,
                         const std::function<nlohmann::json(const limitpay::Authentication&, Timestamp)>& op);
  Response ecash_step(std::string_view step, const nlohmann::json& body);
  Response deposit(const nlohmann::json& body);

  ServiceOptions options_;
  ecash::BankKeys bank_;
  ecash::PublicKey public_key_;
  std::unique_ptr<LockedRandom> rng_;
  Clock clock_;
  LogSink log_;
  std::unique_ptr<limitpay::LimitPayService> accounts_;
  std::unique_ptr<LoginManager> sessions_;
  std::unique_ptr<WireChannel> channel_;

  mutable std::mutex ecash_mutex_;
  std::map<std::string, std::unique_ptr<Withdrawal>> withdrawals_;
  ecash::SpentLedger ledger_;
  std::ofstream spent_file_;
};

/// cpp-httplib front end. start() binds and serves on a background thread.
class HttpServer {
 public:
  HttpServer(EpayService& service, std::filesystem::path static_dir = {});
  ~HttpServer();

  /// Port 0 picks a free port. Returns the bound port.
  int start(const std::string& host, int port);
  /// Blocks until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace epay::harness
