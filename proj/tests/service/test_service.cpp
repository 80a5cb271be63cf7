#include <doctest.h>

#include <fstream>

#include "postforge/api.hpp"
#include "postforge/service.hpp"
#include "support/service_fixture.hpp"
#include "support/transcript.hpp"

using namespace postforge;
using namespace postforge::testing;
using nlohmann::json;

namespace {

AssignmentSession polled(Service& svc) {
  auto r = svc.poll();
  REQUIRE(std::holds_alternative<AssignmentSession>(r));
  return std::get<AssignmentSession>(r);
}

struct Harness {
  Workspace ws;
  Timestamp now = kNow;
  std::vector<std::string> log;
  std::unique_ptr<Service> svc;

  explicit Harness(const std::string& extra = {}, ServiceOptions base = {})
      : ws(twenty_posts(), java_profile(), extra) {
    svc = std::make_unique<Service>(ws.cfg, ws.inputs(), with_clock(std::move(base)));
  }
  ServiceOptions with_clock(ServiceOptions o) {
    o.clock = [this] { return now; };
    o.log = [this](const std::string& line) { log.push_back(line); };
    return o;
  }
  void restart(ServiceOptions base = {}) {
    svc.reset();
    svc = std::make_unique<Service>(ws.cfg, ws.inputs(), with_clock(std::move(base)));
  }
};

}  // namespace

TEST_CASE("service: poll assigns once and keeps the session active") {
  Harness h;
  const auto s = polled(*h.svc);
  CHECK(s.session_id == "1700000000-" + std::to_string(s.question_id));
  REQUIRE(h.log.size() == 1);
  CHECK(h.log[0].find("stored=20 stale=16 related=11 expert=8 deficient=5") != std::string::npos);
  h.now += hours(1);
  CHECK(polled(*h.svc).session_id == s.session_id);
  CHECK(h.log.size() == 1);
  REQUIRE(h.svc->current());
  CHECK(h.svc->current()->session_id == s.session_id);
  // The assignment is recorded in the stored profile.
  const auto profile = load_profile(h.ws.cfg.profile);
  CHECK(profile.last_assignment_time == kNow);
}

TEST_CASE("service: dry-run approval writes exactly one outbox record") {
  Harness h;
  const auto s = polled(*h.svc);
  h.svc->put_answer(s.session_id, "Build the verifier once and reuse it.");
  const auto r = h.svc->approve(s.session_id);
  CHECK_FALSE(r.failed);
  CHECK(r.mode == SubmitMode::dry_run);
  CHECK(r.answer_body == "Build the verifier once and reuse it.");
  CHECK(h.svc->session(s.session_id).state == SessionState::submitted);
  CHECK(h.svc->outbox().records().size() == 1);
  CHECK_THROWS_AS(h.svc->approve(s.session_id), IllegalTransition);
  CHECK(h.svc->outbox().records().size() == 1);
  CHECK_FALSE(h.svc->current());
}

TEST_CASE("service: approval without an edited answer uses the draft") {
  Harness h;
  const auto s = polled(*h.svc);
  REQUIRE(s.draft);
  const auto r = h.svc->approve(s.session_id);
  CHECK(r.answer_body == answer_from_draft(*s.draft));
}

TEST_CASE("service: a suggested session passes through drafted on approval") {
  Harness h;
  auto s = polled(*h.svc);
  const auto r = h.svc->approve(s.session_id, "Short answer.");
  s = h.svc->session(s.session_id);
  std::vector<SessionState> path;
  for (const auto& e : s.history) path.push_back(e.state);
  CHECK(path == std::vector<SessionState>{SessionState::suggested, SessionState::drafted, SessionState::approved,
                                          SessionState::submitted});
  CHECK(r.answer_body == "Short answer.");
}

TEST_CASE("service: decline is final") {
  Harness h;
  const auto s = polled(*h.svc);
  CHECK(h.svc->decline(s.session_id).state == SessionState::declined);
  CHECK_THROWS_AS(h.svc->approve(s.session_id), IllegalTransition);
  CHECK_THROWS_AS(h.svc->decline(s.session_id), IllegalTransition);
  CHECK_THROWS_AS(h.svc->put_answer(s.session_id, "x"), IllegalTransition);
  CHECK(h.svc->outbox().records().empty());
  CHECK_THROWS_AS(h.svc->approve("0-0"), NotFound);
}

TEST_CASE("service: next poll waits for the rate limit window") {
  Harness h;
  const auto s = polled(*h.svc);
  h.svc->decline(s.session_id);
  h.now += hours(2);
  auto r = h.svc->poll();
  REQUIRE(std::holds_alternative<NoCandidate>(r));
  CHECK(std::get<NoCandidate>(r).reason == "rate_limited");
  CHECK(h.svc->next_run() == kNow + hours(24));
  h.now += hours(1);
  r = h.svc->poll();
  CHECK(std::get<NoCandidate>(r).reason == "waiting");
  h.now = kNow + hours(24);
  CHECK(std::holds_alternative<AssignmentSession>(h.svc->poll()));
}

TEST_CASE("service: sessions and settings survive a restart") {
  Harness h;
  const auto s = polled(*h.svc);
  h.svc->put_answer(s.session_id, "edited");
  h.svc->update_settings({{"similarity_floor", 0.2}});
  h.restart();
  REQUIRE(h.svc->current());
  CHECK(h.svc->current()->answer_body == "edited");
  CHECK(h.svc->current()->state == SessionState::drafted);
  CHECK(h.svc->settings().similarity_floor == 0.2);
}

TEST_CASE("service: live posting needs confirmation and a poster") {
  Workspace ws(twenty_posts(), java_profile(), "dry_run = false\n");
  ServiceOptions o;
  CHECK_THROWS_AS(Service(ws.cfg, ws.inputs(), o), std::invalid_argument);
  o.live_confirmed = true;
  CHECK_THROWS_AS(Service(ws.cfg, ws.inputs(), o), std::invalid_argument);
  o.live_poster = [](std::int64_t, const std::string&) { return PostResult{true, 1, {}}; };
  o.log = [](const std::string&) {};
  CHECK(Service(ws.cfg, ws.inputs(), o).live());
}

TEST_CASE("service: a failed live submission stays approved and can be retried") {
  int calls = 0;
  std::vector<std::string> bodies;
  ServiceOptions o;
  o.live_confirmed = true;
  o.live_poster = [&](std::int64_t, const std::string& body) {
    bodies.push_back(body);
    return ++calls == 1 ? PostResult{false, std::nullopt, "HTTP 400: throttle violation"} : PostResult{true, 555, {}};
  };
  Harness h("dry_run = false\n", o);
  const auto s = polled(*h.svc);
  const auto first = h.svc->approve(s.session_id, "final answer");
  CHECK(first.failed);
  CHECK(first.attempt == 1);
  CHECK(first.error == "HTTP 400: throttle violation");
  auto now_s = h.svc->session(s.session_id);
  CHECK(now_s.state == SessionState::approved);
  CHECK(now_s.submission_error == "HTTP 400: throttle violation");
  CHECK(h.svc->current());

  const auto second = h.svc->approve(s.session_id);
  CHECK_FALSE(second.failed);
  CHECK(second.attempt == 2);
  CHECK(second.answer_id == 555);
  CHECK(second.mode == SubmitMode::live);
  CHECK(bodies == std::vector<std::string>{"final answer", "final answer"});
  CHECK(h.svc->session(s.session_id).state == SessionState::submitted);
  CHECK(h.svc->outbox().records().size() == 2);
}

TEST_CASE("service: random command sequences keep one outbox record per submitted session") {
  std::mt19937_64 rng(3);
  Harness h("rate_limit = 100\n");
  for (int step = 0; step < 300; ++step) {
    h.now += std::chrono::minutes(std::uniform_int_distribution<int>(1, 30)(rng));
    auto active = h.svc->current();
    const int cmd = std::uniform_int_distribution<int>(0, 4)(rng);
    try {
      if (cmd == 0 || !active) {
        h.svc->poll();
      } else if (cmd == 1) {
        h.svc->put_answer(active->session_id, "answer " + std::to_string(step));
      } else if (cmd == 2) {
        h.svc->approve(active->session_id);
      } else if (cmd == 3) {
        h.svc->decline(active->session_id);
      } else {
        h.svc->regenerate_draft(active->session_id);
      }
    } catch (const IllegalTransition&) {
    }
    int active_count = 0;
    for (const auto& s : h.svc->sessions()) active_count += s.active();
    REQUIRE(active_count <= 1);
  }
  const auto records = h.svc->outbox().records();
  std::size_t submitted = 0;
  for (const auto& s : h.svc->sessions()) {
    const auto mine = h.svc->outbox().records_for(s.session_id);
    if (s.state == SessionState::submitted) {
      ++submitted;
      REQUIRE(mine.size() == 1);
      CHECK(mine[0].answer_body == s.answer_body);
    } else {
      CHECK(mine.empty());
    }
  }
  CHECK(records.size() == submitted);
  CHECK(submitted > 0);
}

TEST_CASE("api: status codes") {
  Harness h;
  ApiRouter api(*h.svc);
  auto call = [&](std::string method, std::string path, std::string body = {}) {
    return api.handle({std::move(method), std::move(path), std::move(body)});
  };
  CHECK(call("GET", "/assignment").status == 204);
  CHECK(call("POST", "/assignment").status == 405);
  CHECK(call("GET", "/nowhere").status == 404);
  CHECK(call("GET", "/posts/999").status == 404);
  CHECK(call("GET", "/posts/101").status == 200);
  CHECK(json::parse(call("GET", "/posts/101").body).at("question_id") == 101);

  const auto s = polled(*h.svc);
  const std::string base = "/assignment/" + s.session_id;
  const auto got = call("GET", "/assignment");
  CHECK(got.status == 200);
  CHECK(json::parse(got.body).at("session_id") == s.session_id);

  CHECK(call("POST", base + "/draft").status == 200);
  CHECK(call("PUT", base + "/answer", R"({"body": ""})").status == 422);
  CHECK(call("PUT", base + "/answer", "not json").status == 422);
  CHECK(call("PUT", base + "/answer", R"({"body": 3})").status == 422);
  CHECK(call("POST", base + "/answer", R"({"body": "x"})").status == 405);
  CHECK(call("PUT", "/assignment/nope/answer", R"({"body": "x"})").status == 404);
  CHECK(call("PUT", base + "/answer", R"({"body": "edited body"})").status == 200);
  CHECK(call("PUT", "/settings", R"({"rate_limit": 0})").status == 422);
  CHECK(call("PUT", "/settings", R"({"bogus": 1})").status == 422);
  CHECK(call("PUT", "/settings", R"({"rate_limit": 2})").status == 200);
  CHECK(json::parse(call("GET", "/settings").body).at("rate_limit") == 2);
  CHECK(call("DELETE", "/settings").status == 405);

  const auto approved = call("POST", base + "/approve");
  CHECK(approved.status == 200);
  CHECK(json::parse(approved.body).at("answer_body") == "edited body");
  CHECK(h.svc->outbox().records().at(0).answer_body == "edited body");
  CHECK(call("POST", base + "/approve").status == 409);
  CHECK(call("POST", base + "/decline").status == 409);
  CHECK(call("GET", "/assignment").status == 204);
}

TEST_CASE("api: failed live approval is a bad gateway") {
  ServiceOptions o;
  o.live_confirmed = true;
  o.live_poster = [](std::int64_t, const std::string&) { return PostResult{false, std::nullopt, "transport failure"}; };
  Harness h("dry_run = false\n", o);
  const auto s = polled(*h.svc);
  ApiRouter api(*h.svc);
  const auto r = api.handle({"POST", "/assignment/" + s.session_id + "/approve", R"({"body": "x"})"});
  CHECK(r.status == 502);
  CHECK(json::parse(r.body).at("error") == "transport failure");
}

TEST_CASE("api: idle assignment reports the next run") {
  Harness h;
  h.svc->decline(polled(*h.svc).session_id);
  h.svc->poll();
  const auto r = ApiRouter(*h.svc).handle({"GET", "/assignment", {}});
  CHECK(r.status == 204);
  REQUIRE(r.headers.size() == 1);
  CHECK(r.headers[0].first == "X-Next-Run");
  CHECK(r.headers[0].second == format_timestamp(kNow + hours(24)));
}

TEST_CASE("api: scripted session matches the golden transcript") {
  const std::string got = scripted_transcript();
  const auto golden = golden_transcript_path();
  if (std::getenv("POSTFORGE_UPDATE_GOLDEN")) std::ofstream(golden) << got;
  std::ifstream in(golden);
  REQUIRE_MESSAGE(in, "missing golden file; run with POSTFORGE_UPDATE_GOLDEN=1");
  std::ostringstream expected;
  expected << in.rdbuf();
  CHECK(got == expected.str());
  CHECK(scripted_transcript() == got);
}
