#pragma once

// A fixed sequence of API calls against the twenty-post workspace, rendered
// as text. Compared against tests/fixtures/golden_transcript.txt.

#include <sstream>
#include <string>
#include <variant>

#include "postforge/api.hpp"
#include "support/service_fixture.hpp"

namespace postforge::testing {

inline fs::path golden_transcript_path() { return fixtures_dir() / "golden_transcript.txt"; }

inline std::string scripted_transcript() {
  Workspace ws(twenty_posts());
  Timestamp now = kNow;
  Service svc(ws.cfg, ws.inputs(), ws.options(&now));
  ApiRouter api(svc);
  std::ostringstream out;
  auto step = [&](const std::string& method, const std::string& path, const std::string& body = {}) {
    const auto r = api.handle({method, path, body});
    out << method << " " << path;
    if (!body.empty()) out << " " << body;
    out << "\n-> " << r.status;
    for (const auto& [k, v] : r.headers) out << " " << k << ": " << v;
    out << "\n";
    if (!r.body.empty()) out << nlohmann::json::parse(r.body).dump(2) << "\n";
    out << "\n";
  };
  auto poll = [&] {
    const auto r = svc.poll();
    out << "POLL\n-> ";
    if (const auto* s = std::get_if<AssignmentSession>(&r)) out << "session " << s->session_id << "\n\n";
    else out << "no candidate: " << std::get<NoCandidate>(r).reason << "\n\n";
  };

  step("GET", "/assignment");
  poll();
  const std::string id = svc.current()->session_id;
  step("GET", "/assignment");
  step("GET", "/posts/" + std::to_string(svc.current()->question_id));
  now += std::chrono::minutes(5);
  step("POST", "/assignment/" + id + "/draft");
  step("PUT", "/assignment/" + id + "/answer", R"({"body": ""})");
  now += std::chrono::minutes(5);
  step("PUT", "/assignment/" + id + "/answer", R"({"body": "Create the verifier once; verify() returns null for bad tokens."})");
  step("GET", "/settings");
  step("PUT", "/settings", R"({"weights": {"code": 0.6, "api": 0.2, "text": 0.2}})");
  now += std::chrono::minutes(5);
  step("POST", "/assignment/" + id + "/approve");
  step("POST", "/assignment/" + id + "/approve");
  step("POST", "/assignment/missing-1/decline");
  now += hours(1);
  poll();
  step("GET", "/assignment");
  return out.str();
}

}  // namespace postforge::testing
