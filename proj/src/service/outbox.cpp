#define CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_ZLIB_SUPPORT
#include <httplib.h>

#include "postforge/outbox.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "postforge/ingest.hpp"
#include "postforge/store.hpp"

namespace postforge {

using nlohmann::json;

std::string_view to_string(SubmitMode m) { return m == SubmitMode::live ? "live" : "dry_run"; }

void to_json(json& j, const OutboxRecord& r) {
  j = json{{"session_id", r.session_id},
           {"question_id", r.question_id},
           {"answer_body", r.answer_body},
           {"submitted_at", to_epoch(r.submitted_at)},
           {"mode", to_string(r.mode)},
           {"attempt", r.attempt},
           {"failed", r.failed},
           {"error", r.error},
           {"answer_id", r.answer_id ? json(*r.answer_id) : json(nullptr)}};
}

void from_json(const json& j, OutboxRecord& r) {
  r.session_id = j.at("session_id").get<std::string>();
  r.question_id = j.at("question_id").get<std::int64_t>();
  r.answer_body = j.at("answer_body").get<std::string>();
  r.submitted_at = from_epoch(j.at("submitted_at").get<std::int64_t>());
  const auto mode = j.at("mode").get<std::string>();
  if (mode != "live" && mode != "dry_run") throw std::invalid_argument("unknown outbox mode: " + mode);
  r.mode = mode == "live" ? SubmitMode::live : SubmitMode::dry_run;
  r.attempt = j.value("attempt", 1);
  r.failed = j.value("failed", false);
  r.error = j.value("error", std::string{});
  r.answer_id.reset();
  if (j.contains("answer_id") && !j.at("answer_id").is_null()) r.answer_id = j.at("answer_id").get<std::int64_t>();
}

Outbox::Outbox(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

void Outbox::append(const OutboxRecord& r) {
  std::lock_guard lock(mutex_);
  const auto path = dir_ / (r.session_id + "." + std::to_string(r.attempt) + ".json");
  if (std::filesystem::exists(path)) throw std::runtime_error("outbox record already exists: " + path.string());
  write_file_atomically(path, json(r).dump(2) + "\n");
}

std::vector<OutboxRecord> Outbox::records() const {
  std::lock_guard lock(mutex_);
  std::vector<OutboxRecord> out;
  if (!std::filesystem::is_directory(dir_)) return out;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir_)) {
    // Temporaries from an interrupted write do not end in ".json".
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    out.push_back(json::parse(in).get<OutboxRecord>());
  }
  std::stable_sort(out.begin(), out.end(), [](const OutboxRecord& a, const OutboxRecord& b) {
    if (a.submitted_at != b.submitted_at) return a.submitted_at < b.submitted_at;
    if (a.session_id != b.session_id) return a.session_id < b.session_id;
    return a.attempt < b.attempt;
  });
  return out;
}

std::vector<OutboxRecord> Outbox::records_for(const std::string& session_id) const {
  auto all = records();
  std::erase_if(all, [&](const OutboxRecord& r) { return r.session_id != session_id; });
  std::sort(all.begin(), all.end(), [](const OutboxRecord& a, const OutboxRecord& b) { return a.attempt < b.attempt; });
  return all;
}

AnswerPoster make_live_poster(std::string site, std::string key, std::string access_token, const std::string& host) {
  auto client = std::make_shared<httplib::SSLClient>(host);
  client->set_connection_timeout(10, 0);
  client->set_read_timeout(30, 0);
  return [client, site, key, access_token](std::int64_t question_id, const std::string& body) -> PostResult {
    const std::string form = "body=" + url_encode(body) + "&site=" + url_encode(site) + "&key=" + url_encode(key) +
                             "&access_token=" + url_encode(access_token) + "&preview=false";
    auto res = client->Post("/2.3/questions/" + std::to_string(question_id) + "/answers/add", form,
                            "application/x-www-form-urlencoded");
    if (!res) return {false, std::nullopt, "transport failure"};
    try {
      const auto j = json::parse(res->body);
      if (res->status != 200 || j.contains("error_id")) {
        return {false, std::nullopt,
                "HTTP " + std::to_string(res->status) + ": " + j.value("error_message", std::string("unknown error"))};
      }
      return {true, j.at("items").at(0).at("answer_id").get<std::int64_t>(), {}};
    } catch (const json::exception&) {
      return {false, std::nullopt, "HTTP " + std::to_string(res->status) + ": unreadable response"};
    }
  };
}

}  // namespace postforge
