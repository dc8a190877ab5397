#include "epay/harness.hpp"

#include "CLI11.hpp"

#include <csignal>
#include <fstream>
#include <iostream>

using namespace epay;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kRejected = 2;

/// Thrown to leave with exit code 2 after printing a verdict.
struct Rejected {
  std::string message;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  return json::parse(in);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << text << '\n';
  if (!out) throw Error("short write on " + path);
}

std::unique_ptr<RandomSource> make_rng(const std::optional<std::uint64_t>& seed) {
  if (seed) return std::make_unique<SeededRandom>(*seed);
  return std::make_unique<SystemRandom>();
}

ecash::PublicKey load_public_key(const std::string& path) {
  const json j = read_json(path);
  if (j.contains("p")) return harness::bank_keys_from_json(j).public_key();
  return harness::public_key_from_json(j);
}

// -- bank ---------------------------------------------------------------------

void add_bank(CLI::App& app) {
  auto* bank = app.add_subcommand("bank", "Bank key management")->require_subcommand(1);
  auto* keygen = bank->add_subcommand("keygen", "Generate a bank key pair");
  auto bits = std::make_shared<std::size_t>(512);
  auto out = std::make_shared<std::string>();
  auto seed = std::make_shared<std::optional<std::uint64_t>>();
  keygen->add_option("--bits", *bits, "Bits per prime")->check(CLI::Range(8, 4096));
  keygen->add_option("--out", *out, "Key file to write")->required();
  keygen->add_option("--seed", *seed, "Deterministic seed (testing only)");
  keygen->callback([=] {
    const auto rng = make_rng(*seed);
    const auto keys = ecash::bank_keygen(*bits, *rng);
    write_text(*out, harness::to_json(keys).dump(2));
    std::cout << harness::to_json(keys.public_key()).dump() << '\n';
  });
}

// -- serve --------------------------------------------------------------------

harness::HttpServer* g_server = nullptr;

void add_serve(CLI::App& app) {
  auto* serve = app.add_subcommand("serve", "Run the bank web service");
  struct Opts {
    int port = 8080;
    std::string host = "127.0.0.1";
    std::string state;
    std::string channel_key;
    std::string ui;
    std::size_t bits = 512;
    std::size_t length = 6;
    unsigned alphabet = 10;
  };
  auto o = std::make_shared<Opts>();
  serve->add_option("--port", o->port)->check(CLI::Range(0, 65535));
  serve->add_option("--host", o->host);
  serve->add_option("--state", o->state, "State directory (journal, spent coins, bank key)")->required();
  serve->add_option("--channel-key", o->channel_key, "16-byte hex key for VP1 bodies");
  serve->add_option("--ui", o->ui, "Directory of static files to serve at /");
  serve->add_option("--bits", o->bits, "Bits per prime when a bank key must be generated");
  serve->add_option("--password-length", o->length);
  serve->add_option("--alphabet", o->alphabet);
  serve->callback([o] {
    harness::ServiceOptions options;
    options.state_dir = o->state;
    options.limits.password_length = o->length;
    options.limits.alphabet = o->alphabet;
    if (!o->channel_key.empty()) options.channel_key = hex_to_bytes(o->channel_key);

    std::filesystem::create_directories(o->state);
    const auto key_path = std::filesystem::path(o->state) / "bank.json";
    auto rng = std::make_unique<SystemRandom>();
    ecash::BankKeys keys;
    if (std::filesystem::exists(key_path)) {
      keys = harness::bank_keys_from_json(read_json(key_path.string()));
    } else {
      keys = ecash::bank_keygen(o->bits, *rng);
      write_text(key_path.string(), harness::to_json(keys).dump(2));
      std::filesystem::permissions(key_path, std::filesystem::perms::owner_read | std::filesystem::perms::owner_write);
    }
    harness::EpayService service(options, keys, std::move(rng), harness::system_clock_now,
                                 [](std::string_view line) { std::cerr << line << '\n'; });
    harness::HttpServer server(service, o->ui);
    g_server = &server;
    std::signal(SIGINT, [](int) {
      if (g_server) g_server->stop();
    });
    std::signal(SIGTERM, [](int) {
      if (g_server) g_server->stop();
    });
    std::cerr << "listening on " << o->host << ':' << o->port << '\n';
    server.run(o->host, o->port);
    g_server = nullptr;
  });
}

// -- vpass --------------------------------------------------------------------

struct VpassOpts {
  std::string scheme = "eq2";
  unsigned a = 0;
  unsigned z = 10;
  std::string x;
  std::string y;
  std::string k;
  unsigned c = 0;
};

void add_vpass_common(CLI::App* cmd, VpassOpts& o) {
  cmd->add_option("--scheme", o.scheme)->check(CLI::IsMember({"eq1", "eq2"}));
  cmd->add_option("--a", o.a, "Multiplier, a unit mod Z")->required();
  cmd->add_option("--z", o.z, "Alphabet size")->check(CLI::Range(2, 16));
  cmd->add_option("--x", o.x, "Fixed password digits")->required();
  cmd->add_option("--y", o.y, "Salt digits")->required();
}

vpass::VirtualFunction vfunc_for(const VpassOpts& o) {
  return o.scheme == "eq1" ? vpass::VirtualFunction::linear(o.a, o.c, o.z) : vpass::VirtualFunction::randomized(o.a, o.z);
}

void add_vpass(CLI::App& app) {
  auto* vp = app.add_subcommand("vpass", "Dynamic passwords")->require_subcommand(1);

  auto d = std::make_shared<VpassOpts>();
  auto* derive = vp->add_subcommand("derive", "Compute the dynamic password");
  add_vpass_common(derive, *d);
  derive->add_option("--c", d->c, "Constant c")->required();
  derive->callback([d] {
    const auto x = vpass::parse<vpass::FixedPasswordTag>(d->x, d->z);
    const auto y = vpass::parse<vpass::SaltTag>(d->y, d->z);
    const auto f = vfunc_for(*d);
    const auto k = d->scheme == "eq1" ? vpass::derive_eq1(x, y, f) : vpass::derive_eq2(x, y, f, d->c);
    std::cout << vpass::render(k) << '\n';
  });

  auto v = std::make_shared<VpassOpts>();
  auto* verify = vp->add_subcommand("verify", "Check a submitted dynamic password");
  add_vpass_common(verify, *v);
  verify->add_option("--k", v->k, "Submitted digits")->required();
  verify->add_option("--c", v->c, "Constant c (eq1 only)");
  verify->callback([v] {
    const auto x = vpass::parse<vpass::FixedPasswordTag>(v->x, v->z);
    const auto y = vpass::parse<vpass::SaltTag>(v->y, v->z);
    const auto f = vfunc_for(*v);
    const auto k = vpass::DynamicPassword(vpass::parse_digits(v->k, vpass::kMaxEnumeratedAlphabet));
    const bool ok = v->scheme == "eq1" ? vpass::derive_eq1(x, y, f) == k : vpass::verify(x, f, y, k);
    if (!ok) throw Rejected{"rejected"};
    std::cout << "accepted\n";
  });
}

// -- attack -------------------------------------------------------------------

void add_attack(CLI::App& app) {
  auto* attack = app.add_subcommand("attack", "Monte Carlo adversary simulation");
  struct Opts {
    std::string scheme = "eq1";
    std::string adversary = "phisher";
    std::size_t observations = 2;
    std::uint64_t trials = 1000;
    std::uint64_t seed = 1;
    unsigned z = 10;
    std::size_t n = 6;
  };
  auto o = std::make_shared<Opts>();
  attack->add_option("--scheme", o->scheme)->check(CLI::IsMember({"eq1", "eq2"}));
  attack->add_option("--adversary", o->adversary)
      ->check(CLI::IsMember({"phisher", "keylogger", "shoulder-surfer", "multi-observer"}));
  attack->add_option("--observations", o->observations);
  attack->add_option("--trials", o->trials)->check(CLI::PositiveNumber);
  attack->add_option("--seed", o->seed);
  attack->add_option("--z", o->z)->check(CLI::Range(2, 16));
  attack->add_option("--n", o->n)->check(CLI::Range(2, 64));
  attack->callback([o] {
    harness::SimulationConfig c;
    c.scheme = harness::scheme_from(o->scheme);
    c.model = {harness::adversary_kind_from(o->adversary), o->observations};
    c.trials = o->trials;
    c.seed = o->seed;
    c.alphabet = o->z;
    c.length = o->n;
    std::cout << harness::simulate_adversary(c).to_json().dump(2) << '\n';
  });
}

// -- coin ---------------------------------------------------------------------

void add_coin(CLI::App& app) {
  auto* coin = app.add_subcommand("coin", "E-cash coins")->require_subcommand(1);

  struct WithdrawOpts {
    std::string key;
    std::uint64_t value = 0;
    std::string expiry;
    std::string out;
    std::optional<std::uint64_t> seed;
  };
  auto w = std::make_shared<WithdrawOpts>();
  auto* withdraw = coin->add_subcommand("withdraw", "Run a withdrawal against a local bank key");
  withdraw->add_option("--key", w->key, "Bank key file from 'bank keygen'")->required();
  withdraw->add_option("--value", w->value, "Value in cents")->required();
  withdraw->add_option("--expiry", w->expiry, "YYYY-MM-DD (default: one year from today)");
  withdraw->add_option("--out", w->out, "Coin file (default: stdout)");
  withdraw->add_option("--seed", w->seed, "Deterministic seed (testing only)");
  withdraw->callback([w] {
    const auto keys = harness::bank_keys_from_json(read_json(w->key));
    const auto rng = make_rng(w->seed);
    const ecash::Date expiry = w->expiry.empty()
                                   ? harness::date_from_timestamp(harness::system_clock_now() + 365LL * 86400)
                                   : ecash::Date::parse(w->expiry);
    ecash::CoinAttributes attributes{expiry, w->value, ecash::CoinAttributes::random_serial(*rng)};
    auto [session, request] = ecash::user_withdraw_init(keys.public_key(), attributes, *rng);
    const Natural x1 = ecash::bank_challenge(keys, *rng);
    const Natural beta = ecash::user_blind(session, x1, *rng);
    const auto signature = ecash::bank_sign(keys, request.b, request.a_msg, x1, beta);
    const auto c = ecash::user_unblind(session, signature);
    const std::string text = harness::to_json(c).dump(2);
    if (w->out.empty()) {
      std::cout << text << '\n';
    } else {
      write_text(w->out, text);
      std::cout << ecash::coin_id(c) << '\n';
    }
  });

  struct CheckOpts {
    std::string key;
    std::string coin;
    std::string ledger;
    std::string today;
  };
  auto v = std::make_shared<CheckOpts>();
  auto* verify = coin->add_subcommand("verify", "Check a coin's bank signature");
  verify->add_option("--key", v->key, "Bank key or public key file")->required();
  verify->add_option("--coin", v->coin, "Coin file")->required();
  verify->callback([v] {
    const auto key = load_public_key(v->key);
    const auto c = harness::coin_from_json(read_json(v->coin));
    if (!ecash::verify_coin(key, c)) throw Rejected{"invalid"};
    std::cout << "valid " << ecash::coin_id(c) << '\n';
  });

  auto d = std::make_shared<CheckOpts>();
  auto* deposit = coin->add_subcommand("deposit", "Deposit a coin against a spent-coin ledger file");
  deposit->add_option("--key", d->key, "Bank key or public key file")->required();
  deposit->add_option("--coin", d->coin, "Coin file")->required();
  deposit->add_option("--ledger", d->ledger, "Spent-coin ledger, one id per line")->required();
  deposit->add_option("--today", d->today, "YYYY-MM-DD (default: today)");
  deposit->callback([d] {
    const auto key = load_public_key(d->key);
    const auto c = harness::coin_from_json(read_json(d->coin));
    ecash::SpentLedger ledger;
    if (std::ifstream in{d->ledger}) {
      for (std::string line; std::getline(in, line);) {
        if (!line.empty()) ledger.append(line);
      }
    }
    const ecash::Date today =
        d->today.empty() ? harness::date_from_timestamp(harness::system_clock_now()) : ecash::Date::parse(d->today);
    const auto status = ecash::deposit_coin(ledger, key, c, today);
    if (status != ecash::DepositStatus::kAccepted) throw Rejected{std::string(ecash::to_string(status))};
    std::ofstream out(d->ledger, std::ios::app);
    out << ecash::coin_id(c) << '\n';
    if (!out) throw Error("cannot append to " + d->ledger);
    std::cout << ecash::to_string(status) << '\n';
  });
}

// -- account ------------------------------------------------------------------

struct AccountOpts {
  std::string journal;
  std::size_t length = 6;
  unsigned alphabet = 10;
  std::optional<limitpay::Timestamp> now;
  std::optional<std::uint64_t> seed;
  std::string id;
  std::string salt;
  std::string password;
  limitpay::Cents amount = 0;
  std::string random_number;
  std::string merchant;
};

void add_account_common(CLI::App* cmd, AccountOpts& o) {
  cmd->add_option("--journal", o.journal, "Journal file")->required();
  cmd->add_option("--password-length", o.length);
  cmd->add_option("--alphabet", o.alphabet)->check(CLI::Range(2, 16));
  cmd->add_option("--now", o.now, "Unix time (default: now)");
}

void add_auth(CLI::App* cmd, AccountOpts& o) {
  cmd->add_option("--id", o.id, "Account id")->required();
  cmd->add_option("--salt", o.salt, "Salt the password was derived for")->required();
  cmd->add_option("--password", o.password, "Dynamic password")->required();
}

/// Opens the journal, runs `op`, and leaves the journal extended.
template <class Op>
void with_service(const AccountOpts& o, Op op) {
  limitpay::Config config{o.length, o.alphabet, 24 * 60 * 60};
  std::vector<limitpay::JournalRecord> records;
  if (std::filesystem::exists(o.journal)) records = limitpay::Journal::load(o.journal);
  limitpay::LimitPayService service(config, std::move(records));
  service.journal().attach_file(o.journal);
  op(service, o.now.value_or(harness::system_clock_now()));
}

limitpay::Authentication auth_from(const AccountOpts& o, const limitpay::LimitPayService& service) {
  const auto account = service.find_account(o.id);
  const vpass::Digit z = account ? account->vfunc.z() : o.alphabet;
  return {vpass::parse<vpass::SaltTag>(o.salt, z),
          vpass::DynamicPassword(vpass::parse_digits(o.password, vpass::kMaxEnumeratedAlphabet))};
}

json credential_json(const limitpay::TempCredential& c) {
  return {{"id", c.id},
          {"account", c.account_id},
          {"random_number", vpass::render(c.random_number)},
          {"temp_password", vpass::render(c.temp_password)},
          {"allowance", c.allowance},
          {"expires", c.expires}};
}

void add_account(CLI::App& app) {
  auto* account = app.add_subcommand("account", "Limit-bounded accounts (journal file)")->require_subcommand(1);

  auto r = std::make_shared<AccountOpts>();
  auto* reg = account->add_subcommand("register", "Open an account and print its secret code");
  add_account_common(reg, *r);
  reg->add_option("--id", r->id)->required();
  reg->add_option("--balance", r->amount, "Initial balance in cents")->required();
  reg->add_option("--seed", r->seed, "Deterministic seed (testing only)");
  reg->callback([r] {
    with_service(*r, [&](limitpay::LimitPayService& s, limitpay::Timestamp now) {
      const auto rng = make_rng(r->seed);
      const auto reg = s.register_account(r->id, r->amount, *rng, now);
      std::cout << json{{"id", reg.account.id},
                        {"x", vpass::render(reg.secret.fixed_password)},
                        {"a", reg.secret.vfunc.a()},
                        {"z", reg.secret.vfunc.z()}}
                       .dump()
                << '\n';
    });
  });

  auto l = std::make_shared<AccountOpts>();
  auto* limit = account->add_subcommand("set-limit", "Set the spending limit");
  add_account_common(limit, *l);
  add_auth(limit, *l);
  limit->add_option("--limit", l->amount, "Limit in cents")->required();
  limit->callback([l] {
    with_service(*l, [&](limitpay::LimitPayService& s, limitpay::Timestamp now) {
      const auto a = s.set_limit(l->id, auth_from(*l, s), l->amount, now);
      std::cout << json{{"id", a.id}, {"limit", a.limit}, {"balance", a.balance}}.dump() << '\n';
    });
  });

  auto c = std::make_shared<AccountOpts>();
  auto* issue = account->add_subcommand("issue-credential", "Mint a temporary credential");
  add_account_common(issue, *c);
  add_auth(issue, *c);
  issue->add_option("--seed", c->seed, "Deterministic seed (testing only)");
  issue->callback([c] {
    with_service(*c, [&](limitpay::LimitPayService& s, limitpay::Timestamp now) {
      const auto rng = make_rng(c->seed);
      std::cout << credential_json(s.issue_temp_credential(c->id, auth_from(*c, s), *rng, now)).dump() << '\n';
    });
  });

  auto p = std::make_shared<AccountOpts>();
  auto* pay = account->add_subcommand("pay", "Authorize a payment with a temporary credential");
  add_account_common(pay, *p);
  pay->add_option("--account", p->id)->required();
  pay->add_option("--random-number", p->random_number)->required();
  pay->add_option("--temp-password", p->password)->required();
  pay->add_option("--merchant", p->merchant)->required();
  pay->add_option("--amount", p->amount, "Amount in cents")->required();
  pay->callback([p] {
    with_service(*p, [&](limitpay::LimitPayService& s, limitpay::Timestamp now) {
      auto digits = [](const std::string& text) {
        try {
          return vpass::parse_digits(text, vpass::kMaxEnumeratedAlphabet);
        } catch (const DomainError&) {
          return std::vector<vpass::Digit>{};
        }
      };
      const limitpay::CredentialPresentation presentation{p->id, vpass::Salt(digits(p->random_number)),
                                                          vpass::DynamicPassword(digits(p->password))};
      const auto outcome = s.authorize_payment(presentation, p->merchant, p->amount, now);
      if (!outcome.approved) throw Rejected{"declined " + std::string(limitpay::to_string(*outcome.reason))};
      std::cout << "approved\n";
    });
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"epay: dynamic passwords, limit-bounded payments and e-cash"};
  app.require_subcommand(1);
  add_bank(app);
  add_serve(app);
  add_vpass(app);
  add_attack(app);
  add_coin(app);
  add_account(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kError;
  } catch (const Rejected& r) {
    std::cout << r.message << '\n';
    return kRejected;
  } catch (const limitpay::ServiceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == limitpay::ServiceError::Code::kAuthFailed ? kRejected : kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kOk;
}
