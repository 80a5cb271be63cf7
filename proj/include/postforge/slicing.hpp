#pragma once

#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "postforge/clones.hpp"
#include "postforge/lexer.hpp"

namespace postforge {

struct Statement {
  int id = 0;  // 1-based, in source order
  LineRange lines;
  std::size_t first_token = 0;  // half-open range into the body tokens
  std::size_t end_token = 0;
  std::set<std::string> defs;
  std::set<std::string> uses;
  bool opaque = false;  // could not be analysed; uses every identifier, defines nothing
};

/// Statement-level data dependences of one straight-line body. Compound
/// statements (if, loops, try, blocks) are single units with merged sets.
struct StatementGraph {
  std::vector<Statement> statements;
  std::vector<std::pair<int, int>> edges;  // (def statement, use statement), sorted

  const Statement& at(int id) const;
  bool contains(int id) const { return id >= 1 && id <= static_cast<int>(statements.size()); }
};

/// Splits `body` into top-level statements and links each use to the nearest
/// preceding statement that defines the variable.
StatementGraph build_statement_graph(std::span<const Token> body);

/// Seeds plus everything they transitively depend on. Throws
/// std::out_of_range for an unknown seed.
std::set<int> backward_slice(const StatementGraph& g, const std::set<int>& seeds);

/// Seeds plus everything that transitively depends on them.
std::set<int> forward_slice(const StatementGraph& g, const std::set<int>& seeds);

/// Same statements with every edge reversed.
StatementGraph reversed(const StatementGraph& g);

}  // namespace postforge
