#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "postforge/service.hpp"

namespace postforge {

struct ApiRequest {
  std::string method;
  std::string path;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON, empty for 204
  std::vector<std::pair<std::string, std::string>> headers;
};

/// Maps HTTP requests onto the service, independent of any server.
///
///   GET  /assignment                 active session, or 204 with X-Next-Run
///   GET  /posts/{id}                 the stored question with its answers
///   POST /assignment/{id}/draft      regenerate the draft
///   PUT  /assignment/{id}/answer     {"body": "..."} edited answer
///   POST /assignment/{id}/approve    optional {"body": "..."}; returns the outbox record
///   POST /assignment/{id}/decline
///   GET  /settings, PUT /settings    partial JSON patch
///
/// Unknown session or post: 404. Illegal state transition: 409. Malformed or
/// invalid body: 422. Unknown route: 404; wrong method: 405.
class ApiRouter {
 public:
  explicit ApiRouter(Service& service) : service_(service) {}
  ApiResponse handle(const ApiRequest& request);

 private:
  Service& service_;
};

/// cpp-httplib server around a router, plus a background thread that polls
/// the pipeline every `poll_every`.
class HttpServer {
 public:
  HttpServer(Service& service, std::chrono::seconds poll_every);
  ~HttpServer();

  /// Binds and serves until stop(); returns false if binding failed. Port 0
  /// picks a free port, readable through port() once listening.
  bool listen(const std::string& host, int port);
  /// Binds and serves on a background thread; returns the port or -1.
  int start(const std::string& host, int port);
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<int> port_{-1};
};

}  // namespace postforge
