#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "postforge/records.hpp"
#include "postforge/store.hpp"

namespace postforge {

struct FetchRequest {
  std::string tag;  // empty = any tag
  Timestamp from = from_epoch(0);
  Timestamp to = from_epoch(4102444800);  // 2100-01-01
  int page_limit = 10;
  int page_size = 100;
};

/// True when the record carries `tag` and its last activity falls in [from, to].
bool matches_request(const QuestionRecord& q, const FetchRequest& request);

/// Retryable failure talking to the remote API.
class FetchError : public std::runtime_error {
 public:
  FetchError(const std::string& what, int attempts, int status)
      : std::runtime_error(what), attempts_(attempts), status_(status) {}
  int attempts() const { return attempts_; }
  int status() const { return status_; }
  bool retryable() const { return true; }

 private:
  int attempts_;
  int status_;
};

/// Token bucket limiting requests per minute. Time is supplied by the caller
/// so that throttling is testable without sleeping.
class TokenBucket {
 public:
  using Clock = std::chrono::steady_clock;

  TokenBucket(double per_minute, double burst);

  /// Takes one token, returning how long the caller must wait first.
  std::chrono::milliseconds acquire(Clock::time_point now);

  double per_minute() const { return per_minute_; }

 private:
  double per_minute_;
  double burst_;
  double tokens_;
  std::optional<Clock::time_point> last_;
};

struct HttpResponse {
  int status = 0;  // 0 = transport failure
  std::string body;
};

/// Issues a GET for "path?query" against the configured host.
using HttpGet = std::function<HttpResponse(const std::string& path_and_query)>;
using Sleeper = std::function<void(std::chrono::milliseconds)>;
using SteadyNow = std::function<TokenBucket::Clock::time_point()>;

struct ApiConfig {
  std::string site = "stackoverflow";
  std::string key;  // POSTFORGE_SE_KEY
  // Must include question/answer bodies, answers and comment counts; the
  // built-in "withbody" filter only covers bodies.
  std::string filter = "withbody";
  double requests_per_minute = 25.0;
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{1000};
};

/// Paginated reader for the Stack Exchange 2.3 API.
class StackExchangeClient {
 public:
  StackExchangeClient(ApiConfig config, HttpGet get, Sleeper sleep, SteadyNow now);

  /// Fetches questions page by page until has_more is false or page_limit is
  /// reached. Closed questions and records outside the request are counted in
  /// the report and dropped; unparseable items are counted as malformed.
  std::vector<QuestionRecord> fetch_questions(const FetchRequest& request, IngestReport& report);

  /// Reads /users/{id} and /users/{id}/top-tags.
  UserProfile fetch_user(std::int64_t user_id);

  const ApiConfig& config() const { return config_; }

 private:
  nlohmann::json get_json(const std::string& path_and_query);

  ApiConfig config_;
  HttpGet get_;
  Sleeper sleep_;
  SteadyNow now_;
  TokenBucket bucket_;
  std::optional<TokenBucket::Clock::time_point> backoff_until_;
};

/// Converts one API question item. Throws on structurally invalid items.
QuestionRecord question_from_api_item(const nlohmann::json& item, Timestamp as_of);

/// Real HTTPS transport (cpp-httplib + OpenSSL).
HttpGet make_https_get(const std::string& host = "api.stackexchange.com");

/// Percent-encodes a query component.
std::string url_encode(std::string_view text);

struct DumpSource {
  std::filesystem::path path;
};

struct ApiSource {
  StackExchangeClient* client;
};

using Source = std::variant<DumpSource, ApiSource>;

/// Reads a dump in the store's own line format. Malformed lines are counted and
/// skipped; closed/deleted records are excluded.
std::vector<QuestionRecord> read_dump(const std::filesystem::path& path, const FetchRequest& request,
                                      IngestReport& report);

/// Acquires questions from `source` and persists them to `store`.
std::vector<QuestionRecord> fetch_questions(const FetchRequest& request, const Source& source,
                                            Store& store, IngestReport& report);

}  // namespace postforge
