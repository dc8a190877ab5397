#include "epay/limitpay.hpp"

namespace epay::limitpay {

using nlohmann::json;

std::string JournalRecord::to_line() const {
  return json{{"seq", seq}, {"ts", ts}, {"kind", kind}, {"payload", payload}}.dump();
}

JournalRecord JournalRecord::from_line(std::string_view line) {
  const json j = json::parse(line);
  JournalRecord r;
  r.seq = j.at("seq").get<std::uint64_t>();
  r.ts = j.at("ts").get<Timestamp>();
  r.kind = j.at("kind").get<std::string>();
  r.payload = j.at("payload");
  return r;
}

Journal::Journal(std::vector<JournalRecord> records) : records_(std::move(records)) {}

void Journal::attach_file(const std::filesystem::path& path) {
  std::lock_guard lock(mutex_);
  file_.open(path, std::ios::app);
  if (!file_) throw Error("cannot open journal " + path.string());
}

JournalRecord Journal::append(Timestamp ts, std::string kind, json payload) {
  std::lock_guard lock(mutex_);
  JournalRecord r{records_.empty() ? 1 : records_.back().seq + 1, ts, std::move(kind), std::move(payload)};
  if (file_.is_open()) {
    file_ << r.to_line() << '\n';
    file_.flush();
    if (!file_) throw Error("journal write failed");
  }
  records_.push_back(r);
  return r;
}

std::vector<JournalRecord> Journal::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::uint64_t Journal::last_seq() const {
  std::lock_guard lock(mutex_);
  return records_.empty() ? 0 : records_.back().seq;
}

std::vector<JournalRecord> Journal::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read journal " + path.string());
  std::vector<JournalRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(JournalRecord::from_line(line));
    } catch (const json::exception& e) {
      throw JournalCorrupt(out.size(), e.what());
    }
  }
  return out;
}

}  // namespace epay::limitpay
