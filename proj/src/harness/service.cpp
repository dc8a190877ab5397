#include "epay/harness.hpp"

#include <fstream>

namespace epay::harness {

using nlohmann::json;
using limitpay::ServiceError;

namespace {

constexpr std::size_t kMaxPendingWithdrawals = 10'000;

std::vector<std::string_view> split_path(std::string_view path) {
  if (const auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
  std::vector<std::string_view> parts;
  while (!path.empty()) {
    const auto start = path.find_first_not_of('/');
    if (start == std::string_view::npos) break;
    path = path.substr(start);
    const auto end = path.find('/');
    parts.push_back(path.substr(0, end));
    path = end == std::string_view::npos ? std::string_view{} : path.substr(end);
  }
  return parts;
}

Response reply(int status, const json& body) { return {status, body.dump()}; }
Response failure(int status, std::string_view code) { return reply(status, json{{"error", code}}); }

json account_view(const limitpay::Account& a) {
  return {{"id", a.id},
          {"balance", a.balance},
          {"limit", a.limit},
          {"status", a.status == limitpay::AccountStatus::kActive ? "active" : "frozen"},
          {"password_length", a.fixed_password.size()},
          {"alphabet", a.vfunc.z()}};
}

json credential_view(const limitpay::TempCredential& c) {
  return {{"id", c.id},
          {"account", c.account_id},
          {"random_number", vpass::render(c.random_number)},
          {"temp_password", vpass::render(c.temp_password)},
          {"allowance", c.allowance},
          {"remaining", c.remaining},
          {"expires", c.expires},
          {"state", limitpay::to_string(c.state)}};
}

/// Digits that fail to parse become an empty string, which never verifies.
template <class Tag>
vpass::DigitString<Tag> lenient_digits(const json& body, const char* field, vpass::Digit z) {
  try {
    return vpass::parse<Tag>(body.at(field).get<std::string>(), z);
  } catch (const DomainError&) {
    return {};
  }
}

int status_for(ServiceError::Code code) {
  switch (code) {
    case ServiceError::Code::kNotFound:
      return 404;
    case ServiceError::Code::kConflict:
      return 409;
    case ServiceError::Code::kAuthFailed:
      return 403;
    case ServiceError::Code::kInsufficientFunds:
    case ServiceError::Code::kNoLimitSet:
      return 422;
    case ServiceError::Code::kFrozen:
      return 423;
  }
  return 500;
}

}  // namespace

class EpayService::LockedRandom : public RandomSource {
 public:
  explicit LockedRandom(std::unique_ptr<RandomSource> inner) : inner_(std::move(inner)) {}
  std::uint64_t next_u64() override {
    std::lock_guard lock(mutex_);
    return inner_->next_u64();
  }

 private:
  std::mutex mutex_;
  std::unique_ptr<RandomSource> inner_;
};

struct EpayService::Withdrawal {
  std::optional<ecash::WithdrawalSession> wallet;
  ecash::WithdrawalRequest request;
  std::optional<Natural> x1;
  std::optional<Natural> beta;
  std::optional<ecash::BankSignature> signature;
};

EpayService::EpayService(ServiceOptions options, ecash::BankKeys bank, std::unique_ptr<RandomSource> rng,
                         Clock clock, LogSink log)
    : options_(std::move(options)),
      bank_(std::move(bank)),
      public_key_(bank_.public_key()),
      rng_(std::make_unique<LockedRandom>(std::move(rng))),
      clock_(std::move(clock)),
      log_(std::move(log)) {
  if (!clock_) clock_ = system_clock_now;
  if (!options_.channel_key.empty()) channel_ = std::make_unique<WireChannel>(options_.channel_key, 1ULL << 63);

  if (options_.state_dir.empty()) {
    accounts_ = std::make_unique<limitpay::LimitPayService>(options_.limits);
  } else {
    std::filesystem::create_directories(options_.state_dir);
    const auto journal_path = options_.state_dir / "journal.log";
    std::vector<limitpay::JournalRecord> records;
    if (std::filesystem::exists(journal_path)) records = limitpay::Journal::load(journal_path);
    accounts_ = std::make_unique<limitpay::LimitPayService>(options_.limits, std::move(records));
    accounts_->journal().attach_file(journal_path);

    const auto spent_path = options_.state_dir / "spent.log";
    if (std::ifstream in{spent_path}) {
      for (std::string line; std::getline(in, line);) {
        if (!line.empty()) ledger_.append(line);
      }
    }
    spent_file_.open(spent_path, std::ios::app);
    if (!spent_file_) throw Error("cannot open " + spent_path.string());
  }
  sessions_ = std::make_unique<LoginManager>(*accounts_, *rng_, options_.session_ttl);
}

EpayService::~EpayService() = default;

std::size_t EpayService::spent_coins() const {
  std::lock_guard lock(ecash_mutex_);
  return ledger_.size();
}

Response EpayService::handle(std::string_view method, std::string_view path, std::string_view body) {
  bool sealed = false;
  Response response;
  try {
    std::string plain(body);
    if (channel_ && !plain.empty()) {
      const json probe = json::parse(plain, nullptr, false);
      if (probe.is_object() && probe.contains("v")) {
        sealed = true;
        plain = channel_->open(WireRecord::from_text(plain)).payload;
      }
    }
    const json request = plain.empty() ? json::object() : json::parse(plain);
    if (!request.is_object()) throw DomainError("request body must be an object");
    response = dispatch(method, path, request);
  } catch (const ChannelCorrupt&) {
    response = failure(400, "channel-corrupt");
  } catch (const ServiceError& e) {
    response = failure(status_for(e.code()), limitpay::to_string(e.code()));
  } catch (const SessionClosed&) {
    response = failure(409, "session-closed");
  } catch (const StateError&) {
    response = failure(409, "out-of-order");
  } catch (const ResourceLimit&) {
    response = failure(503, "resource-limit");
  } catch (const ecash::DegenerateChallenge&) {
    response = failure(422, "degenerate-challenge");
  } catch (const ecash::BankSignatureInvalid&) {
    response = failure(422, "bank-signature-invalid");
  } catch (const json::exception&) {
    response = failure(400, "bad-request");
  } catch (const DomainError&) {
    response = failure(400, "bad-request");
  } catch (const std::exception&) {
    response = failure(500, "internal");
  }
  if (sealed) response.body = channel_->seal("response", response.body).to_text();
  if (log_) {
    const auto q = path.find('?');
    log_(std::string(method) + " " + std::string(path.substr(0, q)) + " " + std::to_string(response.status));
  }
  return response;
}

Response EpayService::authenticated(
    const std::string& account_id, const json& body,
    const std::function<json(const limitpay::Authentication&, Timestamp)>& op) {
  const auto account = accounts_->find_account(account_id);
  if (!account) throw ServiceError(ServiceError::Code::kNotFound, "no such account");
  const Timestamp now = clock_();
  const auto session_id = body.at("session").get<std::string>();
  const auto password = lenient_digits<vpass::DynamicPasswordTag>(body, "password", account->vfunc.z());

  const vpass::Salt salt = sessions_->claim(session_id, account_id, now);
  try {
    json result = op({salt, password}, now);
    sessions_->settle(session_id, true);
    return reply(200, result);
  } catch (const ServiceError& e) {
    sessions_->settle(session_id, e.code() != ServiceError::Code::kAuthFailed);
    throw;
  }
}

Response EpayService::dispatch(std::string_view method, std::string_view path, const json& body) {
  const auto parts = split_path(path);
  auto is = [&](std::initializer_list<std::string_view> expected) {
    if (parts.size() != expected.size()) return false;
    std::size_t i = 0;
    for (const auto e : expected) {
      if (e != "*" && parts[i] != e) return false;
      ++i;
    }
    return true;
  };

  if (method == "GET") {
    if (is({"healthz"})) return reply(200, {{"status", "ok"}});
    if (is({"ecash", "key"})) return reply(200, to_json(public_key_));
    return failure(404, "not-found");
  }
  if (method != "POST") return failure(405, "method-not-allowed");

  if (is({"accounts"})) {
    const auto reg = accounts_->register_account(body.at("id").get<std::string>(), body.at("balance").get<limitpay::Cents>(),
                                                 *rng_, clock_());
    return reply(201, {{"account", account_view(reg.account)},
                       {"secret",
                        {{"x", vpass::render(reg.secret.fixed_password)},
                         {"a", reg.secret.vfunc.a()},
                         {"z", reg.secret.vfunc.z()}}}});
  }
  if (is({"accounts", "*", "limit"})) {
    const std::string id(parts[1]);
    const auto limit = body.at("limit").get<limitpay::Cents>();
    return authenticated(id, body, [&](const limitpay::Authentication& auth, Timestamp now) {
      return json{{"account", account_view(accounts_->set_limit(id, auth, limit, now))}};
    });
  }
  if (is({"accounts", "*", "credentials"})) {
    const std::string id(parts[1]);
    auto r = authenticated(id, body, [&](const limitpay::Authentication& auth, Timestamp now) {
      return json{{"credential", credential_view(accounts_->issue_temp_credential(id, auth, *rng_, now))}};
    });
    r.status = 201;
    return r;
  }
  if (is({"accounts", "*", "credentials", "*", "revoke"})) {
    const std::string id(parts[1]);
    const std::string credential(parts[3]);
    return authenticated(id, body, [&](const limitpay::Authentication& auth, Timestamp now) {
      return json{{"credential", credential_view(accounts_->revoke_credential(id, auth, credential, now))}};
    });
  }
  if (is({"sessions"})) {
    const auto s = sessions_->open(body.at("account").get<std::string>(), clock_());
    return reply(201, {{"session", s.id},
                       {"account", s.account_id},
                       {"salt", vpass::render(s.salt)},
                       {"expires", s.issued_at + sessions_->ttl()}});
  }
  if (is({"sessions", "*", "login"})) {
    const std::string id(parts[1]);
    const auto session = sessions_->find(id);
    if (!session) throw SessionClosed("no such session");
    const auto account = accounts_->find_account(session->account_id);
    const auto password = lenient_digits<vpass::DynamicPasswordTag>(body, "password", account->vfunc.z());
    if (sessions_->submit(id, password, clock_()) == SessionState::kSucceeded) {
      return reply(200, {{"result", "succeeded"}});
    }
    return failure(403, limitpay::to_string(ServiceError::Code::kAuthFailed));
  }
  if (is({"payments"})) {
    const auto account_id = body.at("account").get<std::string>();
    const auto account = accounts_->find_account(account_id);
    const vpass::Digit z = account ? account->vfunc.z() : vpass::Digit{16};
    const limitpay::CredentialPresentation presentation{
        account_id, lenient_digits<vpass::SaltTag>(body, "random_number", z),
        lenient_digits<vpass::DynamicPasswordTag>(body, "temp_password", z)};
    const auto outcome = accounts_->authorize_payment(presentation, body.at("merchant").get<std::string>(),
                                                      body.at("amount").get<limitpay::Cents>(), clock_());
    if (outcome.approved) return reply(200, {{"approved", true}});
    return reply(402, {{"approved", false}, {"reason", limitpay::to_string(*outcome.reason)}});
  }
  if (parts.size() == 3 && is({"ecash", "withdraw", "*"})) return ecash_step(parts[2], body);
  if (is({"ecash", "deposit"})) return deposit(body);
  return failure(404, "not-found");
}

Response EpayService::ecash_step(std::string_view step, const json& body) {
  if (step == "init") {
    const auto value = body.at("value_cents").get<std::uint64_t>();
    const ecash::Date expiry = body.contains("expiry")
                                   ? ecash::Date::parse(body.at("expiry").get<std::string>())
                                   : date_from_timestamp(clock_() + 365LL * 24 * 60 * 60);
    ecash::CoinAttributes attributes{expiry, value, ecash::CoinAttributes::random_serial(*rng_)};
    auto [session, request] = ecash::user_withdraw_init(public_key_, attributes, *rng_);
    auto w = std::make_unique<Withdrawal>();
    w->wallet.emplace(std::move(session));
    w->request = request;

    std::lock_guard lock(ecash_mutex_);
    if (withdrawals_.size() >= kMaxPendingWithdrawals) throw ResourceLimit("too many pending withdrawals");
    std::string id;
    do {
      id = "wd-" + bytes_to_hex(rng_->bytes(12));
    } while (withdrawals_.contains(id));
    withdrawals_.emplace(id, std::move(w));
    return reply(201, {{"withdrawal", id}, {"b", request.b}, {"a_msg", request.a_msg.to_hex()}});
  }

  const auto id = body.at("withdrawal").get<std::string>();
  std::lock_guard lock(ecash_mutex_);
  const auto it = withdrawals_.find(id);
  if (it == withdrawals_.end()) throw ServiceError(ServiceError::Code::kNotFound, "no such withdrawal");
  Withdrawal& w = *it->second;

  if (step == "challenge") {
    if (w.x1) throw StateError("challenge already issued");
    w.x1 = ecash::bank_challenge(bank_, *rng_);
    return reply(200, {{"x1", w.x1->to_hex()}});
  }
  if (step == "blind") {
    if (!w.x1) throw StateError("no challenge yet");
    w.beta = ecash::user_blind(*w.wallet, *w.x1, *rng_);
    return reply(200, {{"beta", w.beta->to_hex()}});
  }
  if (step == "sign") {
    if (!w.x1) throw StateError("no challenge yet");
    if (w.signature) throw StateError("already signed");
    const Natural beta = body.contains("beta") ? Natural::from_hex(body.at("beta").get<std::string>())
                                               : (w.beta ? *w.beta : throw StateError("nothing to sign"));
    w.signature = ecash::bank_sign(bank_, w.request.b, w.request.a_msg, *w.x1, beta);
    return reply(200, {{"beta_inv", w.signature->beta_inv.to_hex()}, {"t1", w.signature->t1.to_hex()}});
  }
  if (step == "unblind") {
    ecash::BankSignature signature;
    if (body.contains("beta_inv") && body.contains("t1")) {
      signature = {Natural::from_hex(body.at("beta_inv").get<std::string>()),
                   Natural::from_hex(body.at("t1").get<std::string>())};
    } else if (w.signature) {
      signature = *w.signature;
    } else {
      throw StateError("not signed yet");
    }
    const ecash::Coin coin = ecash::user_unblind(*w.wallet, signature);
    withdrawals_.erase(it);
    return reply(200, {{"coin", to_json(coin)}, {"id", ecash::coin_id(coin)}});
  }
  return failure(404, "not-found");
}

Response EpayService::deposit(const json& body) {
  const ecash::Coin coin = coin_from_json(body.at("coin"));
  const ecash::Date today = date_from_timestamp(clock_());
  std::lock_guard lock(ecash_mutex_);
  const auto status = ecash::deposit_coin(ledger_, public_key_, coin, today);
  if (status == ecash::DepositStatus::kAccepted && spent_file_.is_open()) {
    spent_file_ << ecash::coin_id(coin) << '\n';
    spent_file_.flush();
  }
  return reply(status == ecash::DepositStatus::kAccepted ? 200 : 409, {{"status", ecash::to_string(status)}});
}

}  // namespace epay::harness
