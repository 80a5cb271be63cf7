#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "postforge/draft.hpp"
#include "support/programs.hpp"

using namespace postforge;
using postforge::testing::closure;
using postforge::testing::random_method;
using postforge::testing::wrap_in_class;

namespace {

const Timestamp kNow = from_epoch(1'700'000'000);

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CorpusFile corpus_file(const std::string& path, std::string text) {
  CorpusFile f;
  f.path = path;
  f.text = std::move(text);
  f.tokens = lex(f.text, path);
  return f;
}

QuestionRecord question_with(std::vector<std::string> blocks) {
  QuestionRecord q;
  q.question_id = 77;
  q.code_blocks = std::move(blocks);
  return q;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) out += (i ? "\n" : "") + lines[i];
  return out;
}

}  // namespace

TEST_CASE("dedent") {
  CHECK(dedent({"    a", "      b", "", "    c  "}) == "a\n  b\n\nc");
  CHECK(dedent({"x"}) == "x");
  CHECK(dedent({}).empty());
}

TEST_CASE("question tokens join code blocks") {
  const auto s = question_tokens(question_with({"int a = 1;", "int b = a;"}));
  REQUIRE(s.tokens.size() == 10);
  CHECK(s.tokens[5].line == 2);
}

TEST_CASE("no code or no match gives no recommendation") {
  const Corpus corpus{corpus_file("Other.java", slurp(std::string(POSTFORGE_FIXTURES) + "/corpus_auth/Other.java"))};
  CHECK(std::holds_alternative<NoRecommendation>(draft_for_question(question_with({}), corpus, 2, false, kNow)));
  const auto none = draft_for_question(question_with({"int q = 9;\nint r = q;"}), corpus, 2, false, kNow);
  REQUIRE(std::holds_alternative<NoRecommendation>(none));
  CHECK_FALSE(std::get<NoRecommendation>(none).reason.empty());
}

TEST_CASE("a question identical to a method body yields that body") {
  const Corpus corpus{corpus_file("Other.java", slurp(std::string(POSTFORGE_FIXTURES) + "/corpus_auth/Other.java"))};
  const auto out = draft_for_question(question_with({"int y = x * 2;\nreturn y;"}), corpus, 2, false, kNow);
  REQUIRE(std::holds_alternative<DraftAnswer>(out));
  const auto& d = std::get<DraftAnswer>(out);
  CHECK(d.snippet == "int y = x * 2;\nreturn y;");
  CHECK(d.question_id == 77);
  CHECK(d.status == DraftStatus::draft);
  CHECK(d.created_at == kNow);
  CHECK(d.provenance.method_range == LineRange{2, 5});
  CHECK(d.provenance.match.corpus_file == "Other.java");
}

TEST_CASE("figure question drafts the token-verification slice") {
  const std::string root = std::string(POSTFORGE_FIXTURES) + "/corpus_auth";
  const Corpus corpus = load_corpus(root);
  REQUIRE(corpus.size() == 2);
  CHECK(corpus[0].path == "Other.java");
  const auto q = question_with({slurp(std::string(POSTFORGE_FIXTURES) + "/fig3_question.txt")});
  const auto out = draft_for_question(q, corpus, 6, false, kNow);
  REQUIRE(std::holds_alternative<DraftAnswer>(out));
  const auto& d = std::get<DraftAnswer>(out);
  CHECK(d.provenance.match.corpus_file == "TokenCheck.java");
  CHECK(d.provenance.match.corpus_range == LineRange{12, 18});
  CHECK(d.provenance.method_range == LineRange{9, 32});
  CHECK(d.snippet.find("GoogleIdTokenVerifier verifier") != std::string::npos);
  CHECK(d.snippet.find("idToken.getPayload()") != std::string::npos);
  CHECK(d.snippet.find("firstName + \" \" + lastName") != std::string::npos);
  CHECK(d.snippet.find("new NetHttpTransport()") != std::string::npos);
  CHECK(d.snippet.find("unrelated") == std::string::npos);
  CHECK(d.snippet.rfind("final HttpTransport", 0) == 0);
  CHECK(lex(d.snippet).clean());
  for (const auto& r : d.provenance.slice_lines) {
    CHECK_FALSE(r.overlaps(LineRange{30, 30}));
  }
}

TEST_CASE("drafts on generated programs equal the dependence closure") {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    const int n = 20;
    const auto m = random_method(seed, n, "v", "op");
    const auto other = random_method(seed + 5000, 12, "u", "aux");
    const Corpus corpus{corpus_file("a/Noise.java", wrap_in_class("Noise", other.lines)),
                        corpus_file("b/Gen.java", wrap_in_class("Gen", m.lines))};

    const int len = std::uniform_int_distribution<int>(6, 10)(rng);
    const int start = std::uniform_int_distribution<int>(0, n - len)(rng);
    std::vector<std::string> window(m.lines.begin() + start, m.lines.begin() + start + len);
    const auto out = draft_for_question(question_with({join_lines(window)}), corpus, 6, false, kNow);
    REQUIRE(std::holds_alternative<DraftAnswer>(out));
    const auto& d = std::get<DraftAnswer>(out);

    std::set<int> seeds;
    for (int i = start; i < start + len; ++i) seeds.insert(i);
    std::vector<std::string> want;
    for (int i : closure(m, seeds)) want.push_back(m.lines[static_cast<std::size_t>(i)]);
    CHECK(d.snippet == join_lines(want));
    CHECK(d.provenance.match.corpus_range == LineRange{4 + start, 3 + start + len});
    CHECK(d.provenance.seed_statements.size() == static_cast<std::size_t>(len));
    CHECK(lex(d.snippet).clean());
  }
}

TEST_CASE("best match prefers length, then path") {
  const auto m = random_method(9, 10, "v", "op");
  std::vector<std::string> short_body(m.lines.begin(), m.lines.begin() + 7);
  const Corpus corpus{corpus_file("a.java", wrap_in_class("A", short_body)),
                      corpus_file("b.java", wrap_in_class("B", m.lines)),
                      corpus_file("c.java", wrap_in_class("C", m.lines))};
  const auto out = draft_for_question(question_with({join_lines(m.lines)}), corpus, 6, false, kNow);
  REQUIRE(std::holds_alternative<DraftAnswer>(out));
  const auto& d = std::get<DraftAnswer>(out);
  CHECK(d.provenance.match.corpus_file == "b.java");
  REQUIRE(d.provenance.alternatives.size() == 2);
  CHECK(d.provenance.alternatives[0].corpus_file == "c.java");
  CHECK(d.provenance.alternatives[1].corpus_file == "a.java");
}

TEST_CASE("draft json round trip") {
  const Corpus corpus{corpus_file("Other.java", slurp(std::string(POSTFORGE_FIXTURES) + "/corpus_auth/Other.java"))};
  const auto out = draft_for_question(question_with({"int y = x * 2;\nreturn y;"}), corpus, 2, false, kNow);
  const auto& d = std::get<DraftAnswer>(out);
  const auto back = nlohmann::json(d).get<DraftAnswer>();
  CHECK(back.snippet == d.snippet);
  CHECK(back.provenance.match == d.provenance.match);
  CHECK(back.provenance.slice_lines == d.provenance.slice_lines);
  CHECK(back.created_at == d.created_at);
}

TEST_CASE("missing corpus directory throws") {
  CHECK_THROWS_AS(load_corpus("/nonexistent/corpus"), std::runtime_error);
}
