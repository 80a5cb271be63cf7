#include "postforge/service.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

namespace postforge {

namespace fs = std::filesystem;
using nlohmann::json;

void to_json(json& j, const Settings& s) {
  j = json{{"rate_limit", s.rate_limit},
           {"weights", s.weights},
           {"similarity_floor", s.similarity_floor},
           {"min_lines", s.min_lines},
           {"normalize", s.normalize},
           {"retry_period", s.retry_period.count()}};
}

void apply_settings(Settings& s, const json& j) {
  if (!j.is_object()) throw std::invalid_argument("settings must be a JSON object");
  Settings next = s;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "rate_limit") next.rate_limit = v.get<int>();
      else if (key == "weights") {
        if (!v.is_object()) throw std::invalid_argument("weights must be an object");
        next.weights.code = v.value("code", next.weights.code);
        next.weights.api = v.value("api", next.weights.api);
        next.weights.text = v.value("text", next.weights.text);
      } else if (key == "similarity_floor") next.similarity_floor = v.get<double>();
      else if (key == "min_lines") next.min_lines = v.get<int>();
      else if (key == "normalize") next.normalize = v.get<bool>();
      else if (key == "retry_period") next.retry_period = std::chrono::seconds(v.get<std::int64_t>());
      else throw std::invalid_argument("unknown setting '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad setting value: ") + e.what());
  }
  if (next.rate_limit < 1) throw std::invalid_argument("rate_limit must be at least 1");
  next.weights.validate();
  if (next.similarity_floor < 0 || next.similarity_floor > 1) throw std::invalid_argument("similarity_floor must lie in [0, 1]");
  if (next.min_lines < 2) throw std::invalid_argument("min_lines must be at least 2");
  if (next.retry_period.count() <= 0) throw std::invalid_argument("retry_period must be positive");
  s = next;
}

Timestamp system_now() { return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now()); }

Service::Service(PipelineConfig cfg, PipelineInputs inputs, ServiceOptions options)
    : cfg_(std::move(cfg)), inputs_(std::move(inputs)), options_(std::move(options)), outbox_(cfg_.outbox) {
  cfg_.validate();
  if (!cfg_.dry_run) {
    if (!options_.live_confirmed) throw std::invalid_argument("live posting needs explicit confirmation (--live)");
    if (!options_.live_poster) throw std::invalid_argument("live posting needs a poster");
    live_ = true;
  }
  settings_.rate_limit = cfg_.rate_limit.value_or(inputs_.profile.max_suggestions_per_day);
  settings_.weights = cfg_.weights;
  settings_.similarity_floor = cfg_.similarity_floor;
  settings_.min_lines = cfg_.min_lines;
  settings_.normalize = cfg_.normalize;
  settings_.retry_period = cfg_.retry_period;
  fs::create_directories(cfg_.state / "sessions");
  load_state();
}

void Service::load_state() {
  const auto settings_file = cfg_.state / "settings.json";
  if (fs::exists(settings_file)) {
    std::ifstream in(settings_file);
    apply_settings(settings_, json::parse(in));
  }
  for (const auto& e : fs::directory_iterator(cfg_.state / "sessions")) {
    if (e.path().extension() != ".json") continue;
    std::ifstream in(e.path());
    auto s = json::parse(in).get<AssignmentSession>();
    sessions_[s.session_id] = std::move(s);
  }
}

void Service::log(const std::string& line) const {
  if (options_.log) options_.log(line);
  else std::cerr << line << "\n";
}

PipelineConfig Service::effective_config() const {
  PipelineConfig c = cfg_;
  c.rate_limit = settings_.rate_limit;
  c.weights = settings_.weights;
  c.similarity_floor = settings_.similarity_floor;
  c.min_lines = settings_.min_lines;
  c.normalize = settings_.normalize;
  c.retry_period = settings_.retry_period;
  return c;
}

void Service::persist(const AssignmentSession& s) {
  write_file_atomically(cfg_.state / "sessions" / (s.session_id + ".json"), json(s).dump(2) + "\n");
}

const AssignmentSession* Service::active_locked() const {
  const AssignmentSession* best = nullptr;
  for (const auto& [id, s] : sessions_) {
    if (s.active() && (!best || s.history.front().at > best->history.front().at)) best = &s;
  }
  return best;
}

AssignmentSession& Service::find(const std::string& id) {
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFound("unknown session " + id);
  return it->second;
}

std::variant<AssignmentSession, NoCandidate> Service::poll() {
  std::lock_guard lock(mutex_);
  if (const auto* s = active_locked()) return *s;
  const Timestamp now = options_.clock();
  if (next_run_ && now < *next_run_) return NoCandidate{"waiting", *next_run_, {}};

  const PipelineRun run = run_pipeline(effective_config(), inputs_, now);
  if (const auto* none = std::get_if<NoCandidate>(&run.outcome)) {
    log("pipeline " + format_timestamp(now) + ": " + run.counts.summary() + " -> no candidate (" + none->reason +
        "), retry at " + format_timestamp(none->retry_at));
    next_run_ = none->retry_at;
    return *none;
  }
  const auto& s = std::get<AssignmentSession>(run.outcome);
  log("pipeline " + format_timestamp(now) + ": " + run.counts.summary() + " -> assigned question " +
      std::to_string(s.question_id) + " (session " + s.session_id + ", " + std::string(to_string(s.state)) + ")");
  record_assignment(inputs_.profile, now);
  save_profile(cfg_.profile, inputs_.profile);
  sessions_[s.session_id] = s;
  persist(s);
  next_run_.reset();
  return s;
}

std::optional<AssignmentSession> Service::current() const {
  std::lock_guard lock(mutex_);
  if (const auto* s = active_locked()) return *s;
  return std::nullopt;
}

AssignmentSession Service::session(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFound("unknown session " + id);
  return it->second;
}

std::vector<AssignmentSession> Service::sessions() const {
  std::lock_guard lock(mutex_);
  std::vector<AssignmentSession> out;
  for (const auto& [id, s] : sessions_) out.push_back(s);
  return out;
}

std::optional<Timestamp> Service::next_run() const {
  std::lock_guard lock(mutex_);
  return next_run_;
}

AssignmentSession Service::regenerate_draft(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto& s = find(id);
  if (s.state != SessionState::suggested && s.state != SessionState::drafted) {
    throw IllegalTransition(s.state, SessionState::drafted);
  }
  const auto q = std::find_if(inputs_.posts.begin(), inputs_.posts.end(),
                              [&](const QuestionRecord& r) { return r.question_id == s.question_id; });
  if (q == inputs_.posts.end()) throw NotFound("question " + std::to_string(s.question_id) + " is no longer stored");
  attach_draft(s, *q, effective_config(), inputs_.corpus, options_.clock());
  persist(s);
  return s;
}

AssignmentSession Service::put_answer(const std::string& id, const std::string& body) {
  std::lock_guard lock(mutex_);
  auto& s = find(id);
  if (s.state != SessionState::suggested && s.state != SessionState::drafted) {
    throw IllegalTransition(s.state, SessionState::drafted);
  }
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) throw std::invalid_argument("answer body is empty");
  s.answer_body = body;
  if (s.state == SessionState::suggested) s.advance(SessionState::drafted, options_.clock());
  persist(s);
  return s;
}

OutboxRecord Service::approve(const std::string& id, const std::string& body) {
  std::lock_guard lock(mutex_);
  auto& s = find(id);
  const bool retry = s.state == SessionState::approved;
  if (!retry && s.state != SessionState::suggested && s.state != SessionState::drafted) {
    throw IllegalTransition(s.state, SessionState::approved);
  }
  std::string text = body;
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) text = s.answer_body;
  if (text.empty() && s.draft) text = answer_from_draft(*s.draft);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw std::invalid_argument("answer body is empty");

  const Timestamp now = options_.clock();
  if (!retry) {
    if (s.state == SessionState::suggested) s.advance(SessionState::drafted, now);
    s.advance(SessionState::approved, now);
  }
  s.answer_body = text;

  OutboxRecord r;
  r.session_id = s.session_id;
  r.question_id = s.question_id;
  r.answer_body = text;
  r.submitted_at = now;
  r.mode = live_ ? SubmitMode::live : SubmitMode::dry_run;
  r.attempt = static_cast<int>(outbox_.records_for(s.session_id).size()) + 1;
  if (live_) {
    const PostResult result = options_.live_poster(s.question_id, text);
    r.failed = !result.ok;
    r.error = result.error;
    r.answer_id = result.answer_id;
  }
  outbox_.append(r);
  if (r.failed) {
    s.submission_error = r.error;
    log("submission of session " + s.session_id + " failed: " + r.error);
  } else {
    s.submission_error.clear();
    s.advance(SessionState::submitted, now);
  }
  persist(s);
  return r;
}

AssignmentSession Service::decline(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto& s = find(id);
  s.advance(SessionState::declined, options_.clock());
  persist(s);
  return s;
}

QuestionRecord Service::post(std::int64_t question_id) const {
  std::lock_guard lock(mutex_);
  for (const auto& q : inputs_.posts) {
    if (q.question_id == question_id) return q;
  }
  throw NotFound("unknown post " + std::to_string(question_id));
}

Settings Service::settings() const {
  std::lock_guard lock(mutex_);
  return settings_;
}

Settings Service::update_settings(const json& patch) {
  std::lock_guard lock(mutex_);
  apply_settings(settings_, patch);
  write_file_atomically(cfg_.state / "settings.json", json(settings_).dump(2) + "\n");
  return settings_;
}

}  // namespace postforge
