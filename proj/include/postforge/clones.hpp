#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "postforge/lexer.hpp"

namespace postforge {

/// Inclusive 1-based source line range.
struct LineRange {
  int start = 0;
  int end = 0;

  bool overlaps(const LineRange& o) const { return start <= o.end && o.start <= end; }
  bool operator==(const LineRange&) const = default;
};

struct CloneMatch {
  LineRange question_range;
  std::string corpus_file;
  LineRange corpus_range;
  int length_lines = 0;  // matched code lines; blank and comment-only lines do not count
  bool normalized = false;

  bool operator==(const CloneMatch&) const = default;
};

/// Line-oriented duplicate finder. Each source line is reduced to the texts of
/// its tokens; with `normalize`, identifiers become one placeholder and literals
/// another. Reports every maximal run of at least `min_lines` consecutive equal
/// lines between the needle and each corpus stream, longest first, then by
/// corpus file and line. Throws std::invalid_argument when min_lines < 2.
std::vector<CloneMatch> detect_clones(const TokenStream& needle, std::span<const TokenStream> corpus,
                                      int min_lines, bool normalize);

void to_json(nlohmann::json& j, const LineRange& r);
void from_json(const nlohmann::json& j, LineRange& r);
void to_json(nlohmann::json& j, const CloneMatch& m);
void from_json(const nlohmann::json& j, CloneMatch& m);

}  // namespace postforge
