#include "postforge/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace postforge {

namespace {

constexpr std::array<std::string_view, 51> kKeywords = {
    "abstract", "assert",     "boolean",   "break",     "byte",     "case",       "catch",    "char",
    "class",    "const",      "continue",  "default",   "do",       "double",     "else",     "enum",
    "extends",  "final",      "finally",   "float",     "for",      "goto",       "if",       "implements",
    "import",   "instanceof", "int",       "interface", "long",     "native",     "new",      "package",
    "private",  "protected",  "public",    "return",    "short",    "static",     "strictfp", "super",
    "switch",   "synchronized", "this",    "throw",     "throws",   "transient",  "try",      "void",
    "volatile", "while",      "var"};

// Longest first so the scan can take the first prefix that matches.
constexpr std::array<std::string_view, 37> kOperators = {
    ">>>=", "<<=", ">>=", ">>>", "->", "++", "--", "&&", "||", "==", "!=", "<=", ">=",
    "+=",   "-=",  "*=",  "/=",  "&=", "|=", "^=", "%=", "<<", ">>", "+",  "-",  "*",
    "/",    "%",   "=",   "<",   ">",  "!",  "~",  "?",  ":",  "&",  "|"};

constexpr std::array<std::string_view, 12> kPunct = {"...", "::", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@"};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80; }
bool ident_part(unsigned char c) { return ident_start(c) || std::isdigit(c); }

class Lexer {
 public:
  Lexer(std::string_view src, TokenStream& out) : src_(src), out_(out) {}

  void run() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\n') {
        advance(1);
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
        advance(1);
        continue;
      }
      if (starts_with("//")) {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance(1);
        continue;
      }
      if (starts_with("/*")) {
        if (!block_comment()) return;
        continue;
      }
      if (starts_with("\"\"\"")) {
        if (!text_block()) return;
        continue;
      }
      if (c == '"' || c == '\'') {
        if (!quoted(c)) return;
        continue;
      }
      const auto uc = static_cast<unsigned char>(c);
      if (std::isdigit(uc) || (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        number();
        continue;
      }
      if (ident_start(uc)) {
        word();
        continue;
      }
      if (symbol()) continue;
      out_.diagnostics.push_back({line_, column_, std::string("unexpected character '") + c + "'"});
      advance(1);
    }
  }

 private:
  bool starts_with(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i, ++pos_) {
      if (src_[pos_] == '\n') {
        ++line_;
        column_ = 1;
      } else {
        ++column_;
      }
    }
  }

  void emit(TokenKind kind, std::size_t start, int line, int column) {
    out_.tokens.push_back({kind, std::string(src_.substr(start, pos_ - start)), line, column});
  }

  bool block_comment() {
    const int line = line_, column = column_;
    const auto end = src_.find("*/", pos_ + 2);
    if (end == std::string_view::npos) {
      out_.diagnostics.push_back({line, column, "unterminated comment"});
      return false;
    }
    advance(end + 2 - pos_);
    return true;
  }

  bool text_block() {
    const int line = line_, column = column_;
    const std::size_t start = pos_;
    std::size_t i = pos_ + 3;
    while (i < src_.size()) {
      if (src_[i] == '\\') {
        i += 2;
        continue;
      }
      if (src_.substr(i, 3) == "\"\"\"") {
        advance(i + 3 - pos_);
        emit(TokenKind::literal, start, line, column);
        return true;
      }
      ++i;
    }
    out_.diagnostics.push_back({line, column, "unterminated text block"});
    return false;
  }

  bool quoted(char quote) {
    const int line = line_, column = column_;
    const std::size_t start = pos_;
    std::size_t i = pos_ + 1;
    while (i < src_.size() && src_[i] != '\n') {
      if (src_[i] == '\\') {
        i += 2;
        continue;
      }
      if (src_[i] == quote) {
        advance(i + 1 - pos_);
        emit(TokenKind::literal, start, line, column);
        return true;
      }
      ++i;
    }
    out_.diagnostics.push_back({line, column, quote == '"' ? "unterminated string literal" : "unterminated character literal"});
    return false;
  }

  void number() {
    const int line = line_, column = column_;
    const std::size_t start = pos_;
    std::size_t i = pos_;
    auto digits = [&](auto pred) {
      while (i < src_.size() && (pred(static_cast<unsigned char>(src_[i])) || src_[i] == '_')) ++i;
    };
    auto is_dec = [](unsigned char ch) { return std::isdigit(ch) != 0; };
    if (src_[i] == '0' && i + 1 < src_.size() && (src_[i + 1] == 'x' || src_[i + 1] == 'X')) {
      i += 2;
      digits([](unsigned char ch) { return std::isxdigit(ch) != 0; });
    } else if (src_[i] == '0' && i + 1 < src_.size() && (src_[i + 1] == 'b' || src_[i + 1] == 'B')) {
      i += 2;
      digits([](unsigned char ch) { return ch == '0' || ch == '1'; });
    } else {
      digits(is_dec);
      if (i < src_.size() && src_[i] == '.' && !(i + 1 < src_.size() && src_[i + 1] == '.')) {
        ++i;
        digits(is_dec);
      }
      if (i < src_.size() && (src_[i] == 'e' || src_[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
        if (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) {
          i = j;
          digits(is_dec);
        }
      }
    }
    if (i < src_.size() && std::string_view("lLfFdD").find(src_[i]) != std::string_view::npos) ++i;
    advance(i - pos_);
    emit(TokenKind::literal, start, line, column);
  }

  void word() {
    const int line = line_, column = column_;
    const std::size_t start = pos_;
    std::size_t i = pos_;
    while (i < src_.size() && ident_part(static_cast<unsigned char>(src_[i]))) ++i;
    advance(i - pos_);
    const std::string_view text = src_.substr(start, pos_ - start);
    TokenKind kind = TokenKind::identifier;
    if (text == "true" || text == "false" || text == "null") kind = TokenKind::literal;
    else if (is_java_keyword(text)) kind = TokenKind::keyword;
    emit(kind, start, line, column);
  }

  bool symbol() {
    const int line = line_, column = column_;
    const std::size_t start = pos_;
    for (auto p : kPunct) {
      if (starts_with(p)) {
        advance(p.size());
        emit(TokenKind::punct, start, line, column);
        return true;
      }
    }
    for (auto op : kOperators) {
      if (starts_with(op)) {
        advance(op.size());
        emit(TokenKind::op, start, line, column);
        return true;
      }
    }
    if (starts_with("^")) {
      advance(1);
      emit(TokenKind::op, start, line, column);
      return true;
    }
    return false;
  }

  std::string_view src_;
  TokenStream& out_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

}  // namespace

std::string_view to_string(TokenKind k) {
  switch (k) {
    case TokenKind::identifier: return "identifier";
    case TokenKind::keyword: return "keyword";
    case TokenKind::literal: return "literal";
    case TokenKind::op: return "operator";
    case TokenKind::punct: return "punct";
  }
  return "?";
}

bool is_java_keyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

TokenStream lex(std::string_view source, std::string source_id) {
  TokenStream out;
  out.source_id = std::move(source_id);
  Lexer(source, out).run();
  return out;
}

}  // namespace postforge
