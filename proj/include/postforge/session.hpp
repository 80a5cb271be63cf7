#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "postforge/draft.hpp"
#include "postforge/matcher.hpp"
#include "postforge/time.hpp"

namespace postforge {

enum class SessionState : std::uint8_t { suggested, drafted, approved, submitted, declined };

std::string_view to_string(SessionState s);
SessionState session_state_from_string(std::string_view text);

/// suggested -> drafted -> approved -> submitted, and declined from any state
/// before submitted. Nothing else.
bool transition_allowed(SessionState from, SessionState to);

class IllegalTransition : public std::logic_error {
 public:
  IllegalTransition(SessionState from, SessionState to);
  SessionState from() const { return from_; }
  SessionState to() const { return to_; }

 private:
  SessionState from_;
  SessionState to_;
};

struct SessionEvent {
  SessionState state;
  Timestamp at{};
  bool operator==(const SessionEvent&) const = default;
};

struct AssignmentSession {
  std::string session_id;
  std::int64_t question_id = 0;
  double similarity = 0.0;
  ComponentScores components;
  SimilarityWeights weights;  // in force when the post was assigned
  std::optional<DraftAnswer> draft;
  std::string draft_note;   // why there is no draft, when there is none
  std::string answer_body;  // edited by the developer; empty until then
  SessionState state = SessionState::suggested;
  std::vector<SessionEvent> history;
  std::string submission_error;  // last failed live submission

  bool active() const { return state != SessionState::submitted && state != SessionState::declined; }

  /// Appends to history; throws IllegalTransition.
  void advance(SessionState to, Timestamp at);
};

/// Markdown answer built from a draft: a short lead-in and a fenced block.
std::string answer_from_draft(const DraftAnswer& d);

void to_json(nlohmann::json& j, const AssignmentSession& s);
void from_json(const nlohmann::json& j, AssignmentSession& s);

}  // namespace postforge
