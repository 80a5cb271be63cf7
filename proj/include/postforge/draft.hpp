#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "postforge/clones.hpp"
#include "postforge/lexer.hpp"
#include "postforge/records.hpp"
#include "postforge/slicing.hpp"
#include "postforge/time.hpp"

namespace postforge {

struct CorpusFile {
  std::string path;  // relative to the corpus root, '/' separated
  std::string text;
  TokenStream tokens;
};

using Corpus = std::vector<CorpusFile>;

/// Lexes every *.java file under `root`, sorted by relative path. Files that
/// lex with diagnostics are kept; their diagnostics travel in `tokens`.
Corpus load_corpus(const std::filesystem::path& root);

/// Token stream of all the question's code blocks, joined by newlines.
TokenStream question_tokens(const QuestionRecord& q);

enum class DraftStatus : std::uint8_t { draft, approved, submitted };

std::string_view to_string(DraftStatus s);

struct DraftProvenance {
  CloneMatch match;                      // the match the snippet was built from
  std::vector<CloneMatch> alternatives;  // other matches, best first
  LineRange method_range;                // enclosing body in the corpus file
  std::vector<int> seed_statements;
  std::vector<int> slice_statements;
  std::vector<LineRange> slice_lines;  // corpus lines, in source order
};

struct DraftAnswer {
  std::int64_t question_id = 0;
  std::string snippet;
  DraftProvenance provenance;
  DraftStatus status = DraftStatus::draft;
  Timestamp created_at{};
};

struct NoRecommendation {
  std::string reason;
};

using DraftOutcome = std::variant<DraftAnswer, NoRecommendation>;

/// Builds a snippet from the best match: the enclosing method body is split
/// into statements, those overlapping the match are the seeds, and the
/// snippet is the union of the backward and forward slices printed with the
/// developer's own formatting (common indentation removed).
///
/// Best match = most lines, then lowest corpus path, then earliest line.
/// Questions without code and empty match lists give NoRecommendation.
DraftOutcome compose_draft(const QuestionRecord& q, std::span<const CloneMatch> matches, const Corpus& corpus,
                           Timestamp now);

/// Lexes the question, finds clones in the corpus and composes.
DraftOutcome draft_for_question(const QuestionRecord& q, const Corpus& corpus, int min_lines, bool normalize,
                                Timestamp now);

/// Removes the indentation common to all non-blank lines.
std::string dedent(const std::vector<std::string>& lines);

void to_json(nlohmann::json& j, const DraftAnswer& d);
void from_json(const nlohmann::json& j, DraftAnswer& d);

}  // namespace postforge
