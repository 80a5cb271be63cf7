#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "postforge/records.hpp"

namespace postforge {

/// Counters for one ingest run. Malformed or invalid input is counted here,
/// never thrown.
struct IngestReport {
  std::size_t read = 0;
  std::size_t stored = 0;
  std::size_t excluded_closed = 0;
  std::size_t filtered_out = 0;
  std::size_t malformed = 0;
  std::size_t quarantined = 0;
  std::size_t dangling_accepted = 0;
  std::size_t requests = 0;
  std::vector<std::string> warnings;

  std::string summary() const;
};

/// Directory-backed question store.
///
///   <dir>/questions.jsonl   one QuestionRecord per line, ascending question_id
///   <dir>/questions.idx     "question_id byte_offset" per line
///   <dir>/quarantine.jsonl  records that failed validation, with the reason
///   <dir>/users.jsonl       UserProfile records
///
/// Writes rewrite the data file through a temporary and rename it into place,
/// so readers see either the old or the new file. Upserts are keyed by
/// question_id, which makes repeated ingestion of the same input idempotent.
/// One writer at a time; any number of concurrent readers.
class Store {
 public:
  explicit Store(std::filesystem::path dir);

  /// Validates and upserts. Invalid records go to quarantine. Returns the
  /// number stored and quarantined in `report`.
  void upsert(std::span<const QuestionRecord> records, IngestReport& report);
  void upsert_users(std::span<const UserProfile> users);

  std::optional<QuestionRecord> get(std::int64_t question_id) const;
  std::vector<QuestionRecord> load_all() const;
  std::vector<UserProfile> load_users() const;
  std::vector<std::int64_t> ids() const;
  std::size_t size() const;

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path data_file() const { return dir_ / "questions.jsonl"; }

 private:
  void load_index();
  std::vector<QuestionRecord> read_all_unlocked() const;

  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
  std::map<std::int64_t, std::uint64_t> index_;
};

/// Writes `content` to `path` via a sibling temporary and an atomic rename.
void write_file_atomically(const std::filesystem::path& path, const std::string& content);

}  // namespace postforge
