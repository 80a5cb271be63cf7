#include "postforge/store.hpp"

#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>

namespace postforge {

using nlohmann::json;
namespace fs = std::filesystem;

std::string IngestReport::summary() const {
  std::ostringstream out;
  out << "read=" << read << " stored=" << stored << " excluded_closed=" << excluded_closed
      << " filtered_out=" << filtered_out << " malformed=" << malformed
      << " quarantined=" << quarantined << " dangling_accepted=" << dangling_accepted
      << " requests=" << requests;
  return out.str();
}

void write_file_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

Store::Store(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  load_index();
}

void Store::load_index() {
  index_.clear();
  std::ifstream in(dir_ / "questions.idx");
  std::int64_t id = 0;
  std::uint64_t offset = 0;
  while (in >> id >> offset) index_.emplace(id, offset);
  if (index_.empty() && fs::exists(data_file())) {
    // Index missing or stale: rebuild from the data file.
    std::ifstream data(data_file(), std::ios::binary);
    std::string line;
    std::uint64_t pos = 0;
    while (std::getline(data, line)) {
      if (!line.empty()) index_.emplace(json::parse(line).at("question_id").get<std::int64_t>(), pos);
      pos += line.size() + 1;
    }
  }
}

std::vector<QuestionRecord> Store::read_all_unlocked() const {
  std::vector<QuestionRecord> out;
  std::ifstream in(data_file(), std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line).get<QuestionRecord>());
  }
  return out;
}

void Store::upsert(std::span<const QuestionRecord> records, IngestReport& report) {
  std::unique_lock lock(mutex_);
  std::map<std::int64_t, QuestionRecord> merged;
  for (auto& q : read_all_unlocked()) merged.emplace(q.question_id, std::move(q));

  std::set<std::string> quarantine;
  {
    std::ifstream in(dir_ / "quarantine.jsonl");
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) quarantine.insert(line);
    }
  }
  const std::size_t quarantine_before = quarantine.size();

  for (QuestionRecord q : records) {
    normalize(q);
    if (auto problem = validate(q)) {
      quarantine.insert(json{{"reason", *problem}, {"record", q}}.dump());
      ++report.quarantined;
      continue;
    }
    if (q.accepted_dangling) ++report.dangling_accepted;
    merged.insert_or_assign(q.question_id, std::move(q));
    ++report.stored;
  }

  std::string data;
  std::string index;
  std::map<std::int64_t, std::uint64_t> offsets;
  for (const auto& [id, q] : merged) {
    offsets.emplace(id, data.size());
    index += std::to_string(id) + ' ' + std::to_string(data.size()) + '\n';
    data += json(q).dump() + '\n';
  }
  write_file_atomically(data_file(), data);
  write_file_atomically(dir_ / "questions.idx", index);
  if (quarantine.size() != quarantine_before || !fs::exists(dir_ / "quarantine.jsonl")) {
    std::string text;
    for (const auto& line : quarantine) text += line + '\n';
    write_file_atomically(dir_ / "quarantine.jsonl", text);
  }

  index_ = std::move(offsets);
}

void Store::upsert_users(std::span<const UserProfile> users) {
  std::unique_lock lock(mutex_);
  std::map<std::int64_t, UserProfile> merged;
  {
    std::ifstream in(dir_ / "users.jsonl");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto u = json::parse(line).get<UserProfile>();
      merged.emplace(u.user_id, std::move(u));
    }
  }
  for (const auto& u : users) merged.insert_or_assign(u.user_id, u);
  std::string text;
  for (const auto& [id, u] : merged) text += json(u).dump() + '\n';
  write_file_atomically(dir_ / "users.jsonl", text);
}

std::optional<QuestionRecord> Store::get(std::int64_t question_id) const {
  std::shared_lock lock(mutex_);
  const auto it = index_.find(question_id);
  if (it == index_.end()) return std::nullopt;
  std::ifstream in(data_file(), std::ios::binary);
  in.seekg(static_cast<std::streamoff>(it->second));
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  return json::parse(line).get<QuestionRecord>();
}

std::vector<QuestionRecord> Store::load_all() const {
  std::shared_lock lock(mutex_);
  return read_all_unlocked();
}

std::vector<UserProfile> Store::load_users() const {
  std::shared_lock lock(mutex_);
  std::vector<UserProfile> out;
  std::ifstream in(dir_ / "users.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line).get<UserProfile>());
  }
  return out;
}

std::vector<std::int64_t> Store::ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::int64_t> out;
  out.reserve(index_.size());
  for (const auto& [id, offset] : index_) out.push_back(id);
  return out;
}

std::size_t Store::size() const {
  std::shared_lock lock(mutex_);
  return index_.size();
}

}  // namespace postforge
