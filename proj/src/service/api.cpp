#define CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_ZLIB_SUPPORT
#include <httplib.h>

#include "postforge/api.hpp"

#include <condition_variable>
#include <regex>
#include <thread>

namespace postforge {

using nlohmann::json;

namespace {

ApiResponse json_response(int status, const json& body) { return {status, body.dump(), {}}; }

ApiResponse error(int status, const std::string& message) { return json_response(status, {{"error", message}}); }

json parse_body(const std::string& body) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  try {
    return json::parse(body);
  } catch (const json::exception&) {
    throw std::invalid_argument("request body is not valid JSON");
  }
}

std::string body_field(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("request body must be a JSON object");
  if (!j.contains("body")) return {};
  if (!j.at("body").is_string()) throw std::invalid_argument("\"body\" must be a string");
  return j.at("body").get<std::string>();
}

}  // namespace

ApiResponse ApiRouter::handle(const ApiRequest& request) {
  static const std::regex assignment_action(R"(^/assignment/([A-Za-z0-9_-]+)/(draft|answer|approve|decline)$)");
  static const std::regex post_path(R"(^/posts/(\d+)$)");
  const std::string& m = request.method;
  std::smatch match;
  try {
    if (request.path == "/assignment") {
      if (m != "GET") return error(405, "method not allowed");
      if (auto s = service_.current()) return json_response(200, *s);
      ApiResponse r{204, {}, {}};
      if (auto next = service_.next_run()) r.headers.emplace_back("X-Next-Run", format_timestamp(*next));
      return r;
    }
    if (std::regex_match(request.path, match, post_path)) {
      if (m != "GET") return error(405, "method not allowed");
      return json_response(200, service_.post(std::stoll(match[1].str())));
    }
    if (std::regex_match(request.path, match, assignment_action)) {
      const std::string id = match[1].str();
      const std::string action = match[2].str();
      if (action == "answer") {
        if (m != "PUT") return error(405, "method not allowed");
        const json body = parse_body(request.body);
        const std::string text = body_field(body);
        if (text.empty()) throw std::invalid_argument("\"body\" is required");
        return json_response(200, service_.put_answer(id, text));
      }
      if (m != "POST") return error(405, "method not allowed");
      if (action == "draft") return json_response(200, service_.regenerate_draft(id));
      if (action == "decline") return json_response(200, service_.decline(id));
      const OutboxRecord record = service_.approve(id, body_field(parse_body(request.body)));
      return json_response(record.failed ? 502 : 200, record);
    }
    if (request.path == "/settings") {
      if (m == "GET") return json_response(200, service_.settings());
      if (m == "PUT") return json_response(200, service_.update_settings(parse_body(request.body)));
      return error(405, "method not allowed");
    }
    return error(404, "no such resource");
  } catch (const NotFound& e) {
    return error(404, e.what());
  } catch (const IllegalTransition& e) {
    return error(409, e.what());
  } catch (const std::invalid_argument& e) {
    return error(422, e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

struct HttpServer::Impl {
  Service& service;
  ApiRouter router;
  httplib::Server server;
  std::chrono::seconds poll_every;
  std::thread serve_thread;
  std::thread poll_thread;
  std::mutex mutex;
  std::condition_variable wake;
  bool stopping = false;

  Impl(Service& s, std::chrono::seconds every) : service(s), router(s), poll_every(every) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      const ApiResponse r = router.handle({req.method, req.path, req.body});
      res.status = r.status;
      for (const auto& [k, v] : r.headers) res.set_header(k, v);
      if (r.status != 204) res.set_content(r.body, "application/json");
    };
    const std::string any = ".*";
    server.Get(any, handler);
    server.Post(any, handler);
    server.Put(any, handler);
    server.Delete(any, handler);
  }

  void start_polling() {
    poll_thread = std::thread([this] {
      std::unique_lock lock(mutex);
      while (!stopping) {
        lock.unlock();
        try {
          service.poll();
        } catch (const std::exception&) {
          // The service logs its own failures; keep polling.
        }
        lock.lock();
        wake.wait_for(lock, poll_every, [this] { return stopping; });
      }
    });
  }
};

HttpServer::HttpServer(Service& service, std::chrono::seconds poll_every)
    : impl_(std::make_unique<Impl>(service, poll_every)) {}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) return false;
  port_ = bound;
  impl_->start_polling();
  return impl_->server.listen_after_bind();
}

int HttpServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) return -1;
  port_ = bound;
  impl_->start_polling();
  impl_->serve_thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::stop() {
  if (!impl_) return;
  {
    std::lock_guard lock(impl_->mutex);
    impl_->stopping = true;
  }
  impl_->wake.notify_all();
  impl_->server.stop();
  if (impl_->serve_thread.joinable()) impl_->serve_thread.join();
  if (impl_->poll_thread.joinable()) impl_->poll_thread.join();
}

}  // namespace postforge
