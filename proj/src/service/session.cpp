#include "postforge/session.hpp"

namespace postforge {

using nlohmann::json;

std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::suggested: return "suggested";
    case SessionState::drafted: return "drafted";
    case SessionState::approved: return "approved";
    case SessionState::submitted: return "submitted";
    case SessionState::declined: return "declined";
  }
  return "?";
}

SessionState session_state_from_string(std::string_view text) {
  for (auto s : {SessionState::suggested, SessionState::drafted, SessionState::approved, SessionState::submitted,
                 SessionState::declined}) {
    if (to_string(s) == text) return s;
  }
  throw std::invalid_argument("unknown session state: " + std::string(text));
}

bool transition_allowed(SessionState from, SessionState to) {
  using S = SessionState;
  switch (to) {
    case S::drafted: return from == S::suggested;
    case S::approved: return from == S::drafted;
    case S::submitted: return from == S::approved;
    case S::declined: return from == S::suggested || from == S::drafted || from == S::approved;
    case S::suggested: return false;
  }
  return false;
}

IllegalTransition::IllegalTransition(SessionState from, SessionState to)
    : std::logic_error("illegal transition " + std::string(to_string(from)) + " -> " + std::string(to_string(to))),
      from_(from),
      to_(to) {}

void AssignmentSession::advance(SessionState to, Timestamp at) {
  if (!transition_allowed(state, to)) throw IllegalTransition(state, to);
  state = to;
  history.push_back({to, at});
}

std::string answer_from_draft(const DraftAnswer& d) {
  return "Here is how this can be done, adapted from working code:\n\n```java\n" + d.snippet + "\n```\n";
}

void to_json(json& j, const AssignmentSession& s) {
  json history = json::array();
  for (const auto& e : s.history) history.push_back({{"state", to_string(e.state)}, {"at", to_epoch(e.at)}});
  j = json{{"session_id", s.session_id},
           {"question_id", s.question_id},
           {"similarity", s.similarity},
           {"components", {{"code", s.components.code}, {"api", s.components.api}, {"text", s.components.text}}},
           {"weights", s.weights},
           {"draft", s.draft ? json(*s.draft) : json(nullptr)},
           {"draft_note", s.draft_note},
           {"answer_body", s.answer_body},
           {"state", to_string(s.state)},
           {"history", history},
           {"submission_error", s.submission_error}};
}

void from_json(const json& j, AssignmentSession& s) {
  s.session_id = j.at("session_id").get<std::string>();
  s.question_id = j.at("question_id").get<std::int64_t>();
  s.similarity = j.at("similarity").get<double>();
  const auto& c = j.at("components");
  s.components = {c.at("code").get<double>(), c.at("api").get<double>(), c.at("text").get<double>()};
  j.at("weights").get_to(s.weights);
  s.draft.reset();
  if (!j.at("draft").is_null()) s.draft = j.at("draft").get<DraftAnswer>();
  s.draft_note = j.value("draft_note", std::string{});
  s.answer_body = j.value("answer_body", std::string{});
  s.state = session_state_from_string(j.at("state").get<std::string>());
  s.history.clear();
  for (const auto& e : j.at("history")) {
    s.history.push_back({session_state_from_string(e.at("state").get<std::string>()), from_epoch(e.at("at").get<std::int64_t>())});
  }
  s.submission_error = j.value("submission_error", std::string{});
}

}  // namespace postforge
