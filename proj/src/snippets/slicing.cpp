#include "postforge/slicing.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <stdexcept>

namespace postforge {

namespace {

bool is(const Token& t, std::string_view text) { return t.text == text && t.kind != TokenKind::literal; }

bool compound_head(const Token& t) {
  static constexpr std::string_view heads[] = {"if", "for", "while", "do", "try", "switch", "synchronized", "{"};
  return std::find(std::begin(heads), std::end(heads), t.text) != std::end(heads) && t.kind != TokenKind::literal;
}

bool continues_compound(std::span<const Token> body, std::size_t next, const Token& head) {
  if (next >= body.size()) return false;
  const Token& t = body[next];
  if (is(t, "else") || is(t, "catch") || is(t, "finally")) return true;
  return is(head, "do") && is(t, "while");
}

bool is_assignment_op(const Token& t) {
  static constexpr std::string_view ops[] = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="};
  return t.kind == TokenKind::op && std::find(std::begin(ops), std::end(ops), t.text) != std::end(ops);
}

bool is_primitive(const Token& t) {
  static constexpr std::string_view prims[] = {"int", "long", "short", "byte", "char", "boolean", "float", "double", "var"};
  return t.kind == TokenKind::keyword && std::find(std::begin(prims), std::end(prims), t.text) != std::end(prims);
}

// Capitalized names with a lowercase letter are taken to be types, by Java
// naming convention. ALL_CAPS constants stay variables.
bool looks_like_type(const Token& t) {
  if (t.kind != TokenKind::identifier || t.text.empty()) return false;
  if (!std::isupper(static_cast<unsigned char>(t.text[0]))) return false;
  return std::any_of(t.text.begin(), t.text.end(), [](char c) { return std::islower(static_cast<unsigned char>(c)); });
}

// Whether tokens[at] can end a type, so that an identifier after it is being
// declared. A closing '>' only counts when it follows a type name, which keeps
// comparisons such as "n > limit" out.
bool ends_type(std::span<const Token> tokens, std::size_t at) {
  const Token& t = tokens[at];
  if (is_primitive(t) || t.kind == TokenKind::identifier || is(t, "]") || is(t, "...")) return true;
  if (is(t, ">") || is(t, ">>") || is(t, ">>>")) {
    return at > 0 && (looks_like_type(tokens[at - 1]) || is(tokens[at - 1], "?") || is(tokens[at - 1], "<"));
  }
  return false;
}

bool declarator_follow(const Token& t) {
  return is(t, "=") || is(t, ";") || is(t, ",") || is(t, ")") || is(t, ":");
}

void analyse(std::span<const Token> body, Statement& s) {
  const auto tokens = body.subspan(s.first_token, s.end_token - s.first_token);
  int depth = 0;
  for (const Token& t : tokens) {
    if (is(t, "(") || is(t, "[") || is(t, "{")) ++depth;
    if (is(t, ")") || is(t, "]") || is(t, "}")) --depth;
    if (depth < 0) break;
  }
  if (depth != 0) {
    s.opaque = true;
    for (const Token& t : tokens) {
      if (t.kind == TokenKind::identifier) s.uses.insert(t.text);
    }
    return;
  }
  // Depth at which the current declaration's declarators live, or -1.
  int declaration_depth = -1;
  depth = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (is(t, "(") || is(t, "[") || is(t, "{")) ++depth;
    if (is(t, ")") || is(t, "]") || is(t, "}")) {
      --depth;
      if (depth < declaration_depth) declaration_depth = -1;
    }
    if (is(t, ";") && depth == declaration_depth) declaration_depth = -1;
    if (t.kind != TokenKind::identifier) continue;
    const Token* prev = i > 0 ? &tokens[i - 1] : nullptr;
    const Token* next = i + 1 < tokens.size() ? &tokens[i + 1] : nullptr;
    if (prev && (is(*prev, ".") || is(*prev, "@") || is(*prev, "::") || is(*prev, "break") || is(*prev, "continue"))) continue;
    if (next && (is(*next, "(") || is(*next, "->") || is(*next, "::"))) continue;
    if (looks_like_type(t)) continue;
    if (next && is(*next, ":") && !prev) continue;  // statement label

    if (prev && ends_type(tokens, i - 1) && next && declarator_follow(*next)) {
      s.defs.insert(t.text);
      declaration_depth = depth;
      continue;
    }
    if (declaration_depth == depth && prev && is(*prev, ",") && next &&
        (is(*next, "=") || is(*next, ",") || is(*next, ";"))) {
      s.defs.insert(t.text);
      continue;
    }
    if (next && is_assignment_op(*next)) {
      s.defs.insert(t.text);
      if (!is(*next, "=")) s.uses.insert(t.text);
      continue;
    }
    if ((next && (is(*next, "++") || is(*next, "--"))) || (prev && (is(*prev, "++") || is(*prev, "--")))) {
      s.defs.insert(t.text);
      s.uses.insert(t.text);
      continue;
    }
    if (next && is(*next, "[")) {
      // a[i] = v writes into a: treat as a weak definition.
      int d = 0;
      std::size_t k = i + 1;
      for (; k < tokens.size(); ++k) {
        if (is(tokens[k], "[")) ++d;
        if (is(tokens[k], "]") && --d == 0) break;
      }
      if (k + 1 < tokens.size() && is_assignment_op(tokens[k + 1])) s.defs.insert(t.text);
    }
    s.uses.insert(t.text);
  }
}

}  // namespace

const Statement& StatementGraph::at(int id) const {
  if (!contains(id)) throw std::out_of_range("unknown statement id " + std::to_string(id));
  return statements[static_cast<std::size_t>(id - 1)];
}

StatementGraph build_statement_graph(std::span<const Token> body) {
  StatementGraph g;
  std::size_t start = 0;
  auto close = [&](std::size_t end) {
    Statement s;
    s.id = static_cast<int>(g.statements.size()) + 1;
    s.first_token = start;
    s.end_token = end;
    s.lines = {body[start].line, body[end - 1].line};
    g.statements.push_back(std::move(s));
    start = end;
  };
  int paren = 0;
  int brace = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const Token& t = body[i];
    if (is(t, "(") || is(t, "[")) ++paren;
    else if (is(t, ")") || is(t, "]")) --paren;
    else if (is(t, "{")) ++brace;
    else if (is(t, "}")) --brace;
    if (paren < 0 || brace < 0) {
      // Stray closer: everything left becomes one opaque statement.
      close(body.size());
      break;
    }
    if (paren != 0 || brace != 0) continue;
    if (is(t, ";")) {
      // A do-while tail or an if/else without braces keeps going.
      if (continues_compound(body, i + 1, body[start]) && compound_head(body[start])) continue;
      close(i + 1);
    } else if (is(t, "}") && compound_head(body[start])) {
      if (continues_compound(body, i + 1, body[start])) continue;
      if (is(body[start], "do")) continue;  // wait for "while (...);"
      close(i + 1);
    }
  }
  if (start < body.size()) close(body.size());

  for (auto& s : g.statements) analyse(body, s);

  for (const auto& s : g.statements) {
    for (const auto& var : s.uses) {
      for (int d = s.id - 1; d >= 1; --d) {
        if (g.statements[static_cast<std::size_t>(d - 1)].defs.count(var)) {
          g.edges.emplace_back(d, s.id);
          break;
        }
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

namespace {

std::set<int> reach(const StatementGraph& g, const std::set<int>& seeds, bool backward) {
  for (int s : seeds) g.at(s);
  std::vector<std::vector<int>> adj(g.statements.size() + 1);
  for (const auto& [from, to] : g.edges) {
    if (backward) adj[static_cast<std::size_t>(to)].push_back(from);
    else adj[static_cast<std::size_t>(from)].push_back(to);
  }
  std::set<int> seen(seeds);
  std::deque<int> queue(seeds.begin(), seeds.end());
  while (!queue.empty()) {
    const int at = queue.front();
    queue.pop_front();
    for (int n : adj[static_cast<std::size_t>(at)]) {
      if (seen.insert(n).second) queue.push_back(n);
    }
  }
  return seen;
}

}  // namespace

std::set<int> backward_slice(const StatementGraph& g, const std::set<int>& seeds) { return reach(g, seeds, true); }

std::set<int> forward_slice(const StatementGraph& g, const std::set<int>& seeds) { return reach(g, seeds, false); }

StatementGraph reversed(const StatementGraph& g) {
  StatementGraph r = g;
  for (auto& [a, b] : r.edges) std::swap(a, b);
  std::sort(r.edges.begin(), r.edges.end());
  return r;
}

}  // namespace postforge
