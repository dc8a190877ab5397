#include "epay/harness.hpp"

#include <algorithm>
#include <cmath>

namespace epay::harness {

using nlohmann::json;
using vpass::Digit;

namespace {

template <class Tag>
vpass::DigitString<Tag> random_digits(RandomSource& rng, std::size_t n, Digit z) {
  vpass::DigitString<Tag> s;
  s.digits.reserve(n);
  for (std::size_t i = 0; i < n; ++i) s.digits.push_back(static_cast<Digit>(rng.below(z)));
  return s;
}

template <class T>
T pick(const std::vector<T>& from, RandomSource& rng) {
  return from[rng.below(from.size())];
}

std::vector<vpass::Salt> observed_salts(AdversaryKind kind, std::size_t m, std::size_t n, Digit z,
                                        RandomSource& rng) {
  std::vector<vpass::Salt> salts;
  for (std::size_t j = 0; j < m; ++j) {
    if (kind == AdversaryKind::kPhisher && j > 0) {
      // A phisher serves its own login page and steps every digit by one,
      // which keeps each difference a unit.
      vpass::Salt next = salts.back();
      for (auto& d : next.digits) d = (d + 1) % z;
      salts.push_back(next);
    } else {
      salts.push_back(random_digits<vpass::SaltTag>(rng, n, z));
    }
  }
  return salts;
}

std::vector<Digit> eq1_candidates(const std::vector<vpass::Observation>& obs, Digit z) {
  std::vector<Digit> candidates = vpass::units(z);
  for (std::size_t j = 1; j < obs.size(); ++j) {
    for (std::size_t i = 0; i < obs[0].salt.size(); ++i) {
      if (obs[0].salt[i] == obs[j].salt[i]) continue;
      const auto rec = vpass::attack_eq1(obs[0], obs[j], z, i);
      std::vector<Digit> kept;
      std::ranges::set_intersection(candidates, rec.candidates, std::back_inserter(kept));
      candidates = std::move(kept);
    }
  }
  return candidates;
}

struct Tally {
  std::uint64_t successes = 0;
  std::uint64_t unique = 0;
  std::uint64_t candidate_sum = 0;
};

}  // namespace

std::string_view to_string(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::kPhisher:
      return "phisher";
    case AdversaryKind::kKeylogger:
      return "keylogger";
    case AdversaryKind::kShoulderSurfer:
      return "shoulder-surfer";
    case AdversaryKind::kMultiObserver:
      return "multi-observer";
  }
  return "unknown";
}

std::string_view to_string(Scheme scheme) { return scheme == Scheme::kEq1 ? "eq1" : "eq2"; }

AdversaryKind adversary_kind_from(std::string_view name) {
  for (auto k : {AdversaryKind::kPhisher, AdversaryKind::kKeylogger, AdversaryKind::kShoulderSurfer,
                 AdversaryKind::kMultiObserver}) {
    if (to_string(k) == name) return k;
  }
  throw DomainError("unknown adversary kind " + std::string(name));
}

Scheme scheme_from(std::string_view name) {
  if (name == "eq1") return Scheme::kEq1;
  if (name == "eq2") return Scheme::kEq2;
  throw DomainError("unknown scheme " + std::string(name));
}

RateEstimate wilson(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) throw DomainError("wilson interval needs at least one trial");
  if (successes > trials) throw DomainError("more successes than trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1 + z2 / n;
  const double center = (p + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  return {successes, trials, p, std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::vector<Digit> chain_consistent_a(const std::vector<vpass::Observation>& observations, Digit z) {
  std::vector<Digit> out;
  for (Digit a : vpass::units(z)) {
    auto offsets = [&](const vpass::Observation& o) {
      std::vector<Digit> d;
      for (std::size_t i = 1; i < o.submitted.size(); ++i) {
        const std::uint64_t v = std::uint64_t{o.submitted[i]} + z * std::uint64_t{z} -
                                std::uint64_t{a} * o.submitted[i - 1] % z - o.salt[i];
        d.push_back(static_cast<Digit>(v % z));
      }
      return d;
    };
    bool ok = true;
    const auto base = offsets(observations.at(0));
    for (std::size_t j = 1; j < observations.size() && ok; ++j) {
      const auto other = offsets(observations[j]);
      for (std::size_t i = 1; i < base.size() && ok; ++i) {
        ok = (base[i] + z - other[i]) % z == (base[0] + z - other[0]) % z;
      }
    }
    if (ok) out.push_back(a);
  }
  return out;
}

vpass::DynamicPassword chain_forge(const vpass::Observation& seen, const vpass::Salt& live_salt, Digit a, Digit z) {
  const std::size_t n = seen.submitted.size();
  if (seen.salt.size() != n || live_salt.size() != n || n < 2) throw DomainError("length mismatch");
  vpass::DynamicPassword k;
  k.digits.push_back((seen.submitted[0] + z - seen.salt[0] + live_salt[0]) % z);
  for (std::size_t i = 1; i < n; ++i) {
    // x_i + c as seen in the observed login.
    const std::uint64_t offset = std::uint64_t{seen.submitted[i]} + 2 * std::uint64_t{z} -
                                 std::uint64_t{a} * seen.submitted[i - 1] % z - seen.salt[i];
    k.digits.push_back(static_cast<Digit>((std::uint64_t{a} * k.digits.back() + live_salt[i] + offset) % z));
  }
  return k;
}

SimulationReport simulate_adversary(const SimulationConfig& config) {
  if (config.trials == 0) throw DomainError("trials must be >= 1");
  if (config.length < 2) throw DomainError("password length must be >= 2");
  if (config.alphabet < 2 || config.alphabet > vpass::kMaxEnumeratedAlphabet) {
    throw DomainError("simulation alphabet must be in [2, 16]");
  }
  const Digit z = config.alphabet;
  const std::size_t n = config.length;
  const std::size_t m = config.model.observations;
  const bool eq1 = config.scheme == Scheme::kEq1;
  const auto unit_set = vpass::units(z);

  Tally modeled;
  Tally chain;
  for (std::uint64_t t = 0; t < config.trials; ++t) {
    SeededRandom rng(mix_seed(config.seed, t));
    const auto x = random_digits<vpass::FixedPasswordTag>(rng, n, z);
    const Digit a = pick(unit_set, rng);
    const auto f = eq1 ? vpass::VirtualFunction::linear(a, static_cast<Digit>(rng.below(z)), z)
                       : vpass::VirtualFunction::randomized(a, z);

    std::vector<vpass::Observation> obs;
    for (auto& salt : observed_salts(config.model.kind, m, n, z, rng)) {
      auto k = eq1 ? vpass::derive_eq1(x, salt, f) : vpass::derive_eq2(x, salt, f, static_cast<Digit>(rng.below(z)));
      obs.push_back({std::move(salt), std::move(k)});
    }
    const auto live = random_digits<vpass::SaltTag>(rng, n, z);
    auto accepted = [&](const vpass::DynamicPassword& k) {
      return eq1 ? k == vpass::derive_eq1(x, live, f) : vpass::verify(x, f, live, k);
    };
    auto guess = [&] { return random_digits<vpass::DynamicPasswordTag>(rng, n, z); };

    if (eq1) {
      if (obs.empty()) {
        modeled.successes += accepted(guess());
        continue;
      }
      auto candidates = eq1_candidates(obs, z);
      if (candidates.empty()) candidates = unit_set;
      modeled.unique += candidates.size() == 1;
      modeled.candidate_sum += candidates.size();
      const Digit a_guess = pick(candidates, rng);
      vpass::DynamicPassword forged;
      for (std::size_t i = 0; i < n; ++i) {
        forged.digits.push_back(vpass::impersonate_eq1(obs[0].submitted[i], obs[0].salt[i], live[i], a_guess, z));
      }
      modeled.successes += accepted(forged);
      continue;
    }

    // Eq2, modeled adversary: first-digit constraints only, then a guess.
    if (!obs.empty()) {
      const auto set = vpass::consistent_a_set(obs, z);
      modeled.unique += set.size() == 1;
      modeled.candidate_sum += set.size();
    }
    modeled.successes += accepted(guess());

    // Eq2, chain forgery.
    if (obs.empty()) {
      chain.successes += accepted(guess());
      continue;
    }
    auto candidates = chain_consistent_a(obs, z);
    if (candidates.empty()) candidates = unit_set;
    chain.unique += candidates.size() == 1;
    chain.candidate_sum += candidates.size();
    chain.successes += accepted(chain_forge(obs[0], live, pick(candidates, rng), z));
  }

  SimulationReport report;
  report.config = config;
  report.impersonation = wilson(modeled.successes, config.trials);
  if (!eq1) report.chain_forgery = wilson(chain.successes, config.trials);
  const double zd = z;
  const double nd = static_cast<double>(n);
  report.baseline_rate = eq1 ? std::pow(zd, -nd) : std::pow(zd, 1 - nd);
  report.printed_rate = zd / std::pow(2.0, nd);
  const double observed_trials = m == 0 ? 0 : static_cast<double>(config.trials);
  report.unique_multiplier = modeled.unique;
  report.mean_candidates = observed_trials > 0 ? static_cast<double>(modeled.candidate_sum) / observed_trials : 0;
  report.chain_unique_multiplier = chain.unique;
  report.chain_mean_candidates = observed_trials > 0 ? static_cast<double>(chain.candidate_sum) / observed_trials : 0;
  return report;
}

json SimulationReport::to_json() const {
  auto rate = [](const RateEstimate& r) {
    return json{{"successes", r.successes}, {"trials", r.trials}, {"rate", r.rate}, {"wilson95", {r.low, r.high}}};
  };
  json j = {{"scheme", to_string(config.scheme)},
            {"adversary", to_string(config.model.kind)},
            {"observations", config.model.observations},
            {"trials", config.trials},
            {"seed", config.seed},
            {"alphabet", config.alphabet},
            {"length", config.length},
            {"impersonation", rate(impersonation)},
            {"baseline_rate", baseline_rate},
            {"printed_rate", printed_rate},
            {"unique_multiplier", unique_multiplier},
            {"mean_candidates", mean_candidates}};
  if (chain_forgery) {
    j["chain_forgery"] = rate(*chain_forgery);
    j["chain_unique_multiplier"] = chain_unique_multiplier;
    j["chain_mean_candidates"] = chain_mean_candidates;
  }
  return j;
}

}  // namespace epay::harness
