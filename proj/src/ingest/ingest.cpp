#include "postforge/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "postforge/code_blocks.hpp"

namespace postforge {

using nlohmann::json;

bool matches_request(const QuestionRecord& q, const FetchRequest& request) {
  if (!request.tag.empty() &&
      std::find(q.tags.begin(), q.tags.end(), request.tag) == q.tags.end()) {
    return false;
  }
  return q.last_activity_date >= request.from && q.last_activity_date <= request.to;
}

TokenBucket::TokenBucket(double per_minute, double burst)
    : per_minute_(per_minute), burst_(std::max(1.0, burst)), tokens_(std::max(1.0, burst)) {
  if (!(per_minute > 0)) throw std::invalid_argument("requests per minute must be positive");
}

std::chrono::milliseconds TokenBucket::acquire(Clock::time_point now) {
  const double per_ms = per_minute_ / 60000.0;
  if (last_) {
    const double elapsed =
        std::chrono::duration<double, std::milli>(now - *last_).count();
    tokens_ = std::min(burst_, tokens_ + std::max(0.0, elapsed) * per_ms);
  }
  last_ = now;
  tokens_ -= 1.0;
  if (tokens_ >= 0.0) return std::chrono::milliseconds{0};
  // Deficit is repaid by waiting; the token is already spent.
  return std::chrono::milliseconds{static_cast<std::int64_t>(std::ceil(-tokens_ / per_ms))};
}

std::string url_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 15]);
    }
  }
  return out;
}

QuestionRecord question_from_api_item(const json& item, Timestamp as_of) {
  QuestionRecord q;
  q.question_id = item.at("question_id").get<std::int64_t>();
  q.title = decode_html_entities(item.value("title", std::string{}));
  q.body = item.value("body", std::string{});
  q.code_blocks = extract_code_blocks(q.body).blocks;
  q.tags = item.at("tags").get<std::vector<std::string>>();
  q.creation_date = from_epoch(item.at("creation_date").get<std::int64_t>());
  q.last_activity_date = from_epoch(item.value("last_activity_date", to_epoch(q.creation_date)));
  q.score = item.value("score", std::int64_t{0});
  q.view_count = item.value("view_count", std::int64_t{0});
  q.favorite_count = item.value("favorite_count", std::int64_t{0});
  q.comment_count = item.value("comment_count", std::int64_t{0});
  if (item.contains("accepted_answer_id")) {
    q.accepted_answer_id = item.at("accepted_answer_id").get<std::int64_t>();
  }
  if (auto owner = item.find("owner"); owner != item.end()) {
    q.asker_reputation = owner->value("reputation", std::int64_t{0});
  }
  q.closed_or_deleted = item.contains("closed_date") || item.contains("closed_reason");
  for (const auto& a : item.value("answers", json::array())) {
    AnswerRecord answer;
    answer.answer_id = a.at("answer_id").get<std::int64_t>();
    answer.score = a.value("score", std::int64_t{0});
    answer.comment_count = a.value("comment_count", std::int64_t{0});
    if (auto owner = a.find("owner"); owner != a.end()) {
      answer.answerer_reputation = owner->value("reputation", std::int64_t{0});
    }
    answer.body = a.value("body", std::string{});
    answer.code_blocks = extract_code_blocks(answer.body).blocks;
    q.answers.push_back(std::move(answer));
  }
  q.as_of = as_of;
  normalize(q);
  return q;
}

StackExchangeClient::StackExchangeClient(ApiConfig config, HttpGet get, Sleeper sleep, SteadyNow now)
    : config_(std::move(config)),
      get_(std::move(get)),
      sleep_(std::move(sleep)),
      now_(std::move(now)),
      bucket_(config_.requests_per_minute, 1.0) {}

json StackExchangeClient::get_json(const std::string& path_and_query) {
  std::chrono::milliseconds backoff = config_.initial_backoff;
  std::string last_error;
  int last_status = 0;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    auto wait = bucket_.acquire(now_());
    if (backoff_until_) {
      const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(*backoff_until_ - now_());
      wait = std::max(wait, remaining);
    }
    if (wait.count() > 0) sleep_(wait);

    const HttpResponse response = get_(path_and_query);
    last_status = response.status;
    json body;
    bool parsed = false;
    if (!response.body.empty()) {
      body = json::parse(response.body, nullptr, false);
      parsed = !body.is_discarded();
    }
    if (parsed && body.contains("backoff")) {
      backoff_until_ = now_() + std::chrono::seconds{body.at("backoff").get<int>()};
    }
    if (response.status == 200 && parsed) return body;

    const int error_id = parsed ? body.value("error_id", 0) : 0;
    last_error = parsed ? body.value("error_message", std::string{"HTTP error"}) : "transport failure";
    const bool throttled = response.status == 429 || error_id == 502;
    const bool transient = response.status == 0 || response.status >= 500 || (response.status == 200 && !parsed);
    if (!throttled && !transient) {
      throw FetchError("request failed (HTTP " + std::to_string(response.status) + "): " + last_error,
                       attempt, response.status);
    }
    if (attempt == config_.max_attempts) break;
    if (!(throttled && backoff_until_)) sleep_(backoff);
    backoff *= 2;
  }
  throw FetchError("giving up after " + std::to_string(config_.max_attempts) +
                       " attempts: " + last_error,
                   config_.max_attempts, last_status);
}

std::vector<QuestionRecord> StackExchangeClient::fetch_questions(const FetchRequest& request,
                                                                 IngestReport& report) {
  std::vector<QuestionRecord> out;
  const Timestamp as_of = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  for (int page = 1; page <= request.page_limit; ++page) {
    std::ostringstream query;
    query << "/2.3/questions?page=" << page << "&pagesize=" << request.page_size
          << "&fromdate=" << to_epoch(request.from) << "&todate=" << to_epoch(request.to)
          << "&order=desc&sort=activity&site=" << url_encode(config_.site)
          << "&filter=" << url_encode(config_.filter);
    if (!request.tag.empty()) query << "&tagged=" << url_encode(request.tag);
    if (!config_.key.empty()) query << "&key=" << url_encode(config_.key);

    const json body = get_json(query.str());
    ++report.requests;
    for (const auto& item : body.value("items", json::array())) {
      ++report.read;
      QuestionRecord q;
      try {
        q = question_from_api_item(item, as_of);
      } catch (const std::exception& e) {
        ++report.malformed;
        report.warnings.push_back(std::string("malformed item: ") + e.what());
        continue;
      }
      if (q.closed_or_deleted) {
        ++report.excluded_closed;
      } else if (!matches_request(q, request)) {
        ++report.filtered_out;
      } else {
        out.push_back(std::move(q));
      }
    }
    if (!body.value("has_more", false)) break;
  }
  return out;
}

UserProfile StackExchangeClient::fetch_user(std::int64_t user_id) {
  std::string suffix = "?site=" + url_encode(config_.site);
  if (!config_.key.empty()) suffix += "&key=" + url_encode(config_.key);
  UserProfile profile;
  profile.user_id = user_id;
  const json user = get_json("/2.3/users/" + std::to_string(user_id) + suffix);
  const auto items = user.value("items", json::array());
  if (!items.empty()) profile.reputation = items.front().value("reputation", std::int64_t{0});
  const json tags = get_json("/2.3/users/" + std::to_string(user_id) + "/top-tags" + suffix);
  for (const auto& item : tags.value("items", json::array())) {
    std::string name = item.value("tag_name", std::string{});
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (!name.empty() &&
        std::find(profile.top_tags.begin(), profile.top_tags.end(), name) == profile.top_tags.end()) {
      profile.top_tags.push_back(std::move(name));
    }
  }
  return profile;
}

std::vector<QuestionRecord> read_dump(const std::filesystem::path& path, const FetchRequest& request,
                                      IngestReport& report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dump " + path.string());
  std::vector<QuestionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++report.read;
    QuestionRecord q;
    try {
      q = json::parse(line).get<QuestionRecord>();
    } catch (const std::exception& e) {
      ++report.malformed;
      report.warnings.push_back("line " + std::to_string(line_no) + ": " + e.what());
      continue;
    }
    if (q.code_blocks.empty() && !q.body.empty()) q.code_blocks = extract_code_blocks(q.body).blocks;
    normalize(q);
    if (q.closed_or_deleted) {
      ++report.excluded_closed;
    } else if (!matches_request(q, request)) {
      ++report.filtered_out;
    } else {
      out.push_back(std::move(q));
    }
  }
  return out;
}

std::vector<QuestionRecord> fetch_questions(const FetchRequest& request, const Source& source,
                                            Store& store, IngestReport& report) {
  std::vector<QuestionRecord> records = std::visit(
      [&](const auto& s) -> std::vector<QuestionRecord> {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, DumpSource>) {
          return read_dump(s.path, request, report);
        } else {
          return s.client->fetch_questions(request, report);
        }
      },
      source);
  store.upsert(records, report);
  // Quarantined records are not returned.
  std::erase_if(records, [](const QuestionRecord& q) { return validate(q).has_value(); });
  return records;
}

}  // namespace postforge
