#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "postforge/time.hpp"

namespace postforge {

enum class SubmitMode : std::uint8_t { dry_run, live };

std::string_view to_string(SubmitMode m);

struct OutboxRecord {
  std::string session_id;
  std::int64_t question_id = 0;
  std::string answer_body;
  Timestamp submitted_at{};
  SubmitMode mode = SubmitMode::dry_run;
  int attempt = 1;
  bool failed = false;
  std::string error;
  std::optional<std::int64_t> answer_id;  // returned by the site in live mode

  bool operator==(const OutboxRecord&) const = default;
};

void to_json(nlohmann::json& j, const OutboxRecord& r);
void from_json(const nlohmann::json& j, OutboxRecord& r);

/// One file per record, "<session_id>.<attempt>.json", written to a temporary
/// and renamed into place. Existing records are never overwritten.
class Outbox {
 public:
  explicit Outbox(std::filesystem::path dir);

  /// Throws std::runtime_error if the record's file already exists.
  void append(const OutboxRecord& r);
  std::vector<OutboxRecord> records() const;
  /// Records of one session, by attempt.
  std::vector<OutboxRecord> records_for(const std::string& session_id) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
};

struct PostResult {
  bool ok = false;
  std::optional<std::int64_t> answer_id;
  std::string error;
};

/// Posts an answer to a question on the live site.
using AnswerPoster = std::function<PostResult(std::int64_t question_id, const std::string& body)>;

/// Posts through the Stack Exchange write API (/answers/add). Needs an
/// access token with write scope and an app key.
AnswerPoster make_live_poster(std::string site, std::string key, std::string access_token,
                              const std::string& host = "api.stackexchange.com");

}  // namespace postforge
