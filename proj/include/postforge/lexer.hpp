#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace postforge {

enum class TokenKind : std::uint8_t { identifier, keyword, literal, op, punct };

std::string_view to_string(TokenKind k);

struct Token {
  TokenKind kind = TokenKind::identifier;
  std::string text;
  int line = 1;    // 1-based
  int column = 1;  // 1-based, in bytes

  bool operator==(const Token&) const = default;
};

struct LexDiagnostic {
  int line = 1;
  int column = 1;
  std::string message;
};

/// Tokens of one source, comments and whitespace dropped, ordered by
/// (line, column).
struct TokenStream {
  std::string source_id;
  std::vector<Token> tokens;
  std::vector<LexDiagnostic> diagnostics;

  bool clean() const { return diagnostics.empty(); }
};

bool is_java_keyword(std::string_view word);

/// Java lexical grammar, close enough for clone matching and slicing.
/// An unterminated string, char, text block or comment stops lexing at that
/// point with a diagnostic. A stray character is reported and skipped.
TokenStream lex(std::string_view source, std::string source_id = {});

}  // namespace postforge
