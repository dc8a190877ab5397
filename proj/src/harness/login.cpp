#include "epay/harness.hpp"

namespace epay::harness {

std::string_view to_string(SessionState state) {
  switch (state) {
    case SessionState::kOpen:
      return "open";
    case SessionState::kSucceeded:
      return "succeeded";
    case SessionState::kFailed:
      return "failed";
    case SessionState::kExpired:
      return "expired";
  }
  return "unknown";
}

LoginManager::LoginManager(limitpay::LimitPayService& accounts, RandomSource& rng, Timestamp ttl)
    : accounts_(accounts), rng_(rng), ttl_(ttl) {
  if (ttl <= 0) throw DomainError("session lifetime must be positive");
}

LoginSession LoginManager::open(const std::string& account_id, Timestamp now) {
  const auto account = accounts_.find_account(account_id);
  if (!account) throw limitpay::ServiceError(limitpay::ServiceError::Code::kNotFound, "no such account");

  std::lock_guard lock(mutex_);
  // Drop sessions that can no longer be used.
  std::erase_if(sessions_, [&](const auto& entry) { return entry.second.issued_at + 2 * ttl_ <= now; });

  LoginSession session;
  session.account_id = account_id;
  session.issued_at = now;
  const vpass::Digit z = account->vfunc.z();
  for (std::size_t i = 0; i < account->fixed_password.size(); ++i) {
    session.salt.digits.push_back(static_cast<vpass::Digit>(rng_.below(z)));
  }
  do {
    session.id = "ls-" + bytes_to_hex(rng_.bytes(12));
  } while (sessions_.contains(session.id));
  sessions_.emplace(session.id, session);
  return session;
}

vpass::Salt LoginManager::claim(const std::string& session_id, const std::string& account_id, Timestamp now) {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end() || it->second.account_id != account_id) throw SessionClosed("no such open session");
  LoginSession& s = it->second;
  if (s.state != SessionState::kOpen) throw SessionClosed("session already used");
  if (now >= s.issued_at + ttl_ || now < s.issued_at) {
    s.state = SessionState::kExpired;
    throw SessionClosed("session expired");
  }
  // Closed before verification so a second submission cannot race the first.
  s.state = SessionState::kFailed;
  return s.salt;
}

void LoginManager::settle(const std::string& session_id, bool succeeded) {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(session_id);
  if (it != sessions_.end()) it->second.state = succeeded ? SessionState::kSucceeded : SessionState::kFailed;
}

SessionState LoginManager::submit(const std::string& session_id, const vpass::DynamicPassword& submitted,
                                  Timestamp now) {
  std::string account_id;
  {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw SessionClosed("no such open session");
    account_id = it->second.account_id;
  }
  const vpass::Salt salt = claim(session_id, account_id, now);
  const bool ok = accounts_.check_real_credential(account_id, {salt, submitted});
  settle(session_id, ok);
  return ok ? SessionState::kSucceeded : SessionState::kFailed;
}

std::optional<LoginSession> LoginManager::find(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

}  // namespace epay::harness
