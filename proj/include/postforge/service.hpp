#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "postforge/outbox.hpp"
#include "postforge/pipeline.hpp"
#include "postforge/session.hpp"

namespace postforge {

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Settings adjustable at runtime (GET/PUT /settings).
struct Settings {
  int rate_limit = 1;
  SimilarityWeights weights;
  double similarity_floor = 0.05;
  int min_lines = 6;
  bool normalize = false;
  std::chrono::seconds retry_period = hours(6);

  bool operator==(const Settings&) const = default;
};

void to_json(nlohmann::json& j, const Settings& s);
/// Applies the keys present in `j` over `s`; throws std::invalid_argument on
/// bad values or unknown keys.
void apply_settings(Settings& s, const nlohmann::json& j);

using Clock = std::function<Timestamp()>;
using Logger = std::function<void(const std::string&)>;

Timestamp system_now();

struct ServiceOptions {
  Clock clock = system_now;
  Logger log;                 // default: stderr
  AnswerPoster live_poster;   // used only when live posting is enabled
  bool live_confirmed = false;  // the explicit --live switch
};

/// The developer-facing loop around one profile: at most one active session,
/// persisted under cfg.state, submissions through the outbox. All methods are
/// serialized by one mutex.
class Service {
 public:
  /// Throws std::invalid_argument when cfg asks for live posting without
  /// confirmation or without a poster.
  Service(PipelineConfig cfg, PipelineInputs inputs, ServiceOptions options = {});

  /// Returns the active session, or runs the pipeline when none is active and
  /// the retry time has come. A skipped run reports reason "waiting".
  std::variant<AssignmentSession, NoCandidate> poll();

  std::optional<AssignmentSession> current() const;
  AssignmentSession session(const std::string& id) const;
  std::vector<AssignmentSession> sessions() const;
  std::optional<Timestamp> next_run() const;

  AssignmentSession regenerate_draft(const std::string& id);
  AssignmentSession put_answer(const std::string& id, const std::string& body);
  /// Approves and submits. The body is `body` if non-empty, else the stored
  /// answer, else one built from the draft. A session that was only suggested
  /// passes through drafted. A failed live submission leaves the session
  /// approved and can be retried.
  OutboxRecord approve(const std::string& id, const std::string& body = {});
  AssignmentSession decline(const std::string& id);

  QuestionRecord post(std::int64_t question_id) const;

  Settings settings() const;
  Settings update_settings(const nlohmann::json& patch);

  const Outbox& outbox() const { return outbox_; }
  bool live() const { return live_; }

 private:
  AssignmentSession& find(const std::string& id);
  const AssignmentSession* active_locked() const;
  void persist(const AssignmentSession& s);
  void load_state();
  void log(const std::string& line) const;
  PipelineConfig effective_config() const;

  PipelineConfig cfg_;
  PipelineInputs inputs_;
  ServiceOptions options_;
  Settings settings_;
  Outbox outbox_;
  bool live_ = false;
  std::map<std::string, AssignmentSession> sessions_;
  std::optional<Timestamp> next_run_;
  mutable std::mutex mutex_;
};

}  // namespace postforge
