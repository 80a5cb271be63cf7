#include <doctest.h>

#include <fstream>
#include <sstream>

#include "postforge/lexer.hpp"

using namespace postforge;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("simple declaration") {
  const auto s = lex("int a = 0;");
  REQUIRE(s.tokens.size() == 5);
  CHECK(s.tokens[0] == Token{TokenKind::keyword, "int", 1, 1});
  CHECK(s.tokens[1] == Token{TokenKind::identifier, "a", 1, 5});
  CHECK(s.tokens[2] == Token{TokenKind::op, "=", 1, 7});
  CHECK(s.tokens[3] == Token{TokenKind::literal, "0", 1, 9});
  CHECK(s.tokens[4] == Token{TokenKind::punct, ";", 1, 10});
  CHECK(s.clean());
}

TEST_CASE("empty source") {
  const auto s = lex("");
  CHECK(s.tokens.empty());
  CHECK(s.clean());
}

TEST_CASE("comments and whitespace are dropped, lines kept") {
  const auto s = lex("// head\nx /* inline */ += 1;\n/* multi\nline */ y--;");
  REQUIRE(s.tokens.size() == 7);
  CHECK(s.tokens[0].text == "x");
  CHECK(s.tokens[0].line == 2);
  CHECK(s.tokens[1].text == "+=");
  CHECK(s.tokens[4].text == "y");
  CHECK(s.tokens[4].line == 4);
  CHECK(s.tokens[5].text == "--");
}

TEST_CASE("literals") {
  const auto s = lex(R"(a = "x\"y"; c = '\n'; n = 0x1F + 1_000L + 3.5e-2f + .5 + 0b101; t = true; z = null;)");
  CHECK(s.clean());
  std::vector<std::string> literals;
  for (const auto& t : s.tokens) {
    if (t.kind == TokenKind::literal) literals.push_back(t.text);
  }
  CHECK(literals == std::vector<std::string>{R"("x\"y")", R"('\n')", "0x1F", "1_000L", "3.5e-2f", ".5", "0b101", "true", "null"});
}

TEST_CASE("text blocks") {
  const auto s = lex("String q = \"\"\"\n  select *\n  \"\"\";\nint k;");
  CHECK(s.clean());
  CHECK(s.tokens[3].kind == TokenKind::literal);
  CHECK(s.tokens.back().line == 4);
}

TEST_CASE("operators take the longest match") {
  const auto s = lex("a >>>= b >> c -> d :: e ... f != g");
  std::vector<std::string> ops;
  for (const auto& t : s.tokens) {
    if (t.kind != TokenKind::identifier) ops.push_back(t.text);
  }
  CHECK(ops == std::vector<std::string>{">>>=", ">>", "->", "::", "...", "!="});
}

TEST_CASE("unterminated string stops with a diagnostic") {
  const auto s = lex("int a = 1;\nString s = \"open\nint b = 2;");
  REQUIRE(s.diagnostics.size() == 1);
  CHECK(s.diagnostics[0].line == 2);
  CHECK(s.diagnostics[0].message.find("unterminated") != std::string::npos);
  CHECK(s.tokens.size() == 8);  // up to and including '='
}

TEST_CASE("unterminated comment stops with a diagnostic") {
  const auto s = lex("x = 1; /* never closed");
  REQUIRE(s.diagnostics.size() == 1);
  CHECK(s.tokens.size() == 4);
}

TEST_CASE("stray characters are reported and skipped") {
  const auto s = lex("a # b");
  CHECK(s.diagnostics.size() == 1);
  CHECK(s.tokens.size() == 2);
}

TEST_CASE("keyword table") {
  CHECK(is_java_keyword("synchronized"));
  CHECK(is_java_keyword("instanceof"));
  CHECK_FALSE(is_java_keyword("String"));
  CHECK(lex("true").tokens[0].kind == TokenKind::literal);
}

TEST_CASE("figure snippet lexes cleanly") {
  const auto s = lex(slurp(std::string(POSTFORGE_FIXTURES) + "/corpus_auth/TokenCheck.java"));
  CHECK(s.clean());
  bool found = false;
  for (const auto& t : s.tokens) found |= t.kind == TokenKind::identifier && t.text == "GoogleIdTokenVerifier";
  CHECK(found);
  for (std::size_t i = 1; i < s.tokens.size(); ++i) {
    const auto& a = s.tokens[i - 1];
    const auto& b = s.tokens[i];
    REQUIRE((a.line < b.line || (a.line == b.line && a.column < b.column)));
  }
}
