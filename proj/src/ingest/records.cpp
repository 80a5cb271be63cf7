#include "postforge/records.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace postforge {

using nlohmann::json;

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::optional<std::string> validate(const QuestionRecord& q) {
  if (q.question_id <= 0) return "question_id must be positive";
  if (q.tags.empty()) return "tags must be non-empty";
  for (const auto& tag : q.tags) {
    if (tag.empty()) return "empty tag";
    if (tag != lowercase(tag)) return "tag not lowercase: " + tag;
  }
  if (q.last_activity_date < q.creation_date) return "last_activity_date precedes creation_date";
  if (q.view_count < 0 || q.favorite_count < 0 || q.comment_count < 0 || q.asker_reputation < 0) {
    return "negative counter";
  }
  if (q.accepted_answer_id && *q.accepted_answer_id <= 0) return "accepted_answer_id must be positive";
  std::set<std::int64_t> ids;
  for (const auto& a : q.answers) {
    if (a.answer_id <= 0) return "answer_id must be positive";
    if (!ids.insert(a.answer_id).second) return "duplicate answer_id " + std::to_string(a.answer_id);
    if (a.comment_count < 0 || a.answerer_reputation < 0) return "negative answer counter";
  }
  return std::nullopt;
}

void normalize(QuestionRecord& q) {
  for (auto& tag : q.tags) tag = lowercase(tag);
  q.accepted_dangling = false;
  if (q.accepted_answer_id) {
    q.accepted_dangling = std::none_of(q.answers.begin(), q.answers.end(), [&](const AnswerRecord& a) {
      return a.answer_id == *q.accepted_answer_id;
    });
  }
}

void to_json(json& j, const AnswerRecord& a) {
  j = json{{"answer_id", a.answer_id},
           {"score", a.score},
           {"comment_count", a.comment_count},
           {"answerer_reputation", a.answerer_reputation},
           {"body", a.body},
           {"code_blocks", a.code_blocks}};
}

void from_json(const json& j, AnswerRecord& a) {
  j.at("answer_id").get_to(a.answer_id);
  a.score = j.value("score", std::int64_t{0});
  a.comment_count = j.value("comment_count", std::int64_t{0});
  a.answerer_reputation = j.value("answerer_reputation", std::int64_t{0});
  a.body = j.value("body", std::string{});
  a.code_blocks = j.value("code_blocks", std::vector<std::string>{});
}

void to_json(json& j, const QuestionRecord& q) {
  j = json{{"question_id", q.question_id},
           {"title", q.title},
           {"body", q.body},
           {"code_blocks", q.code_blocks},
           {"tags", q.tags},
           {"creation_date", to_epoch(q.creation_date)},
           {"last_activity_date", to_epoch(q.last_activity_date)},
           {"score", q.score},
           {"view_count", q.view_count},
           {"favorite_count", q.favorite_count},
           {"comment_count", q.comment_count},
           {"accepted_answer_id", q.accepted_answer_id ? json(*q.accepted_answer_id) : json(nullptr)},
           {"answers", q.answers},
           {"asker_reputation", q.asker_reputation},
           {"closed_or_deleted", q.closed_or_deleted},
           {"accepted_dangling", q.accepted_dangling},
           {"as_of", to_epoch(q.as_of)}};
}

void from_json(const json& j, QuestionRecord& q) {
  j.at("question_id").get_to(q.question_id);
  q.title = j.value("title", std::string{});
  q.body = j.value("body", std::string{});
  q.code_blocks = j.value("code_blocks", std::vector<std::string>{});
  j.at("tags").get_to(q.tags);
  q.creation_date = from_epoch(j.at("creation_date").get<std::int64_t>());
  q.last_activity_date = from_epoch(j.at("last_activity_date").get<std::int64_t>());
  q.score = j.value("score", std::int64_t{0});
  q.view_count = j.value("view_count", std::int64_t{0});
  q.favorite_count = j.value("favorite_count", std::int64_t{0});
  q.comment_count = j.value("comment_count", std::int64_t{0});
  q.accepted_answer_id.reset();
  if (auto it = j.find("accepted_answer_id"); it != j.end() && !it->is_null()) {
    q.accepted_answer_id = it->get<std::int64_t>();
  }
  q.answers = j.value("answers", std::vector<AnswerRecord>{});
  q.asker_reputation = j.value("asker_reputation", std::int64_t{0});
  q.closed_or_deleted = j.value("closed_or_deleted", false);
  q.accepted_dangling = j.value("accepted_dangling", false);
  q.as_of = from_epoch(j.value("as_of", std::int64_t{0}));
}

void to_json(json& j, const UserProfile& u) {
  j = json{{"user_id", u.user_id}, {"reputation", u.reputation}, {"top_tags", u.top_tags}};
}

void from_json(const json& j, UserProfile& u) {
  j.at("user_id").get_to(u.user_id);
  u.reputation = j.value("reputation", std::int64_t{0});
  u.top_tags = j.value("top_tags", std::vector<std::string>{});
}

}  // namespace postforge
