#include <doctest.h>

#include <fstream>
#include <random>
#include <set>

#include "postforge/outbox.hpp"
#include "postforge/session.hpp"
#include "support/service_fixture.hpp"

using namespace postforge;
using postforge::testing::TempDir;

namespace {

using S = SessionState;
constexpr S kStates[] = {S::suggested, S::drafted, S::approved, S::submitted, S::declined};

// The lifecycle written out edge by edge.
const std::set<std::pair<S, S>> kEdges = {
    {S::suggested, S::drafted}, {S::drafted, S::approved},  {S::approved, S::submitted},
    {S::suggested, S::declined}, {S::drafted, S::declined}, {S::approved, S::declined},
};

AssignmentSession fresh_session() {
  AssignmentSession s;
  s.session_id = "1700000000-7";
  s.question_id = 7;
  s.history.push_back({S::suggested, from_epoch(1'700'000'000)});
  return s;
}

}  // namespace

TEST_CASE("session: transition table matches the lifecycle") {
  for (S from : kStates) {
    for (S to : kStates) {
      CHECK_MESSAGE(transition_allowed(from, to) == kEdges.contains({from, to}), to_string(from), " -> ", to_string(to));
    }
  }
}

TEST_CASE("session: state names round trip") {
  for (S s : kStates) CHECK(session_state_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(session_state_from_string("pending"), std::invalid_argument);
}

TEST_CASE("session: random command sequences never leave the lifecycle") {
  std::mt19937_64 rng(11);
  for (int run = 0; run < 500; ++run) {
    auto s = fresh_session();
    S expected = S::suggested;
    for (int step = 0; step < 8; ++step) {
      const S to = kStates[std::uniform_int_distribution<int>(0, 4)(rng)];
      const bool legal = kEdges.contains({expected, to});
      if (legal) {
        s.advance(to, from_epoch(1'700'000'000 + step));
        expected = to;
      } else {
        CHECK_THROWS_AS(s.advance(to, from_epoch(0)), IllegalTransition);
      }
      REQUIRE(s.state == expected);
      REQUIRE(s.history.back().state == expected);
    }
    // History is a path through the lifecycle.
    for (std::size_t i = 1; i < s.history.size(); ++i) {
      REQUIRE(kEdges.contains({s.history[i - 1].state, s.history[i].state}));
    }
    CHECK(s.active() == (expected != S::submitted && expected != S::declined));
  }
}

TEST_CASE("session: JSON round trip") {
  auto s = fresh_session();
  s.similarity = 0.625;
  s.components = {0.5, 1.0, 0.25};
  s.answer_body = "use the builder";
  DraftAnswer d;
  d.question_id = 7;
  d.snippet = "int y = x * 2;";
  d.created_at = from_epoch(1'700'000'000);
  s.draft = d;
  s.advance(S::drafted, from_epoch(1'700'000'100));
  const auto back = nlohmann::json(s).get<AssignmentSession>();
  CHECK(nlohmann::json(back) == nlohmann::json(s));
  CHECK(back.state == S::drafted);
  REQUIRE(back.draft);
  CHECK(back.draft->snippet == "int y = x * 2;");
}

TEST_CASE("session: answer built from a draft fences the snippet") {
  DraftAnswer d;
  d.snippet = "a();\nb();";
  const auto body = answer_from_draft(d);
  CHECK(body.find("```java\na();\nb();\n```") != std::string::npos);
}

TEST_CASE("outbox: append-only records") {
  TempDir dir;
  Outbox box(dir.path / "outbox");
  OutboxRecord r;
  r.session_id = "1700000000-7";
  r.question_id = 7;
  r.answer_body = "body";
  r.submitted_at = from_epoch(1'700'000'000);
  r.attempt = 1;
  box.append(r);
  CHECK_THROWS_AS(box.append(r), std::runtime_error);
  r.attempt = 2;
  r.mode = SubmitMode::live;
  r.failed = true;
  r.error = "HTTP 400: bad";
  box.append(r);
  // Leftover temporaries are not records.
  std::ofstream(dir.path / "outbox" / "1700000000-9.1.json.tmp") << "{";

  const auto all = box.records();
  REQUIRE(all.size() == 2);
  CHECK(all[0].attempt == 1);
  CHECK(all[0].mode == SubmitMode::dry_run);
  CHECK(all[1].failed);
  CHECK(all[1].error == "HTTP 400: bad");
  CHECK(box.records_for("1700000000-7").size() == 2);
  CHECK(box.records_for("other").empty());
  CHECK(Outbox(dir.path / "outbox").records().size() == 2);
}

TEST_CASE("outbox: JSON rejects unknown modes") {
  OutboxRecord r;
  r.session_id = "s";
  auto j = nlohmann::json(r);
  CHECK(j.at("mode") == "dry_run");
  CHECK(j.get<OutboxRecord>().session_id == "s");
  j["mode"] = "carrier_pigeon";
  CHECK_THROWS_AS(j.get<OutboxRecord>(), std::invalid_argument);
}
