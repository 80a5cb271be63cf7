#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "postforge/time.hpp"

namespace postforge {

struct AnswerRecord {
  std::int64_t answer_id = 0;
  std::int64_t score = 0;
  std::int64_t comment_count = 0;
  std::int64_t answerer_reputation = 0;
  std::string body;
  std::vector<std::string> code_blocks;

  bool operator==(const AnswerRecord&) const = default;
};

struct QuestionRecord {
  std::int64_t question_id = 0;
  std::string title;
  std::string body;
  std::vector<std::string> code_blocks;
  std::vector<std::string> tags;
  Timestamp creation_date{};
  Timestamp last_activity_date{};
  std::int64_t score = 0;
  std::int64_t view_count = 0;
  std::int64_t favorite_count = 0;
  std::int64_t comment_count = 0;
  std::optional<std::int64_t> accepted_answer_id;
  std::vector<AnswerRecord> answers;
  std::int64_t asker_reputation = 0;
  bool closed_or_deleted = false;
  // Set on ingest when accepted_answer_id names an answer that is not in `answers`.
  bool accepted_dangling = false;
  // When the counters were captured. Temporal normalization is left to callers.
  Timestamp as_of{};

  bool operator==(const QuestionRecord&) const = default;
};

struct UserProfile {
  std::int64_t user_id = 0;
  std::int64_t reputation = 0;
  std::vector<std::string> top_tags;

  bool operator==(const UserProfile&) const = default;
};

/// Returns a description of the first violated invariant, or nullopt when the
/// record is valid. Dangling accepted ids are not a violation; they are flagged.
std::optional<std::string> validate(const QuestionRecord& q);

/// Recomputes derived fields (accepted_dangling) and lowercases tags.
void normalize(QuestionRecord& q);

void to_json(nlohmann::json& j, const AnswerRecord& a);
void from_json(const nlohmann::json& j, AnswerRecord& a);
void to_json(nlohmann::json& j, const QuestionRecord& q);
void from_json(const nlohmann::json& j, QuestionRecord& q);
void to_json(nlohmann::json& j, const UserProfile& u);
void from_json(const nlohmann::json& j, UserProfile& u);

}  // namespace postforge
