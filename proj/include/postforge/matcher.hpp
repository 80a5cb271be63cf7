#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "postforge/lexer.hpp"
#include "postforge/records.hpp"
#include "postforge/time.hpp"

namespace postforge {

inline constexpr int kShingleSize = 5;

/// What the developer is working on, reduced to three comparable views.
struct CodingContext {
  std::map<std::string, int> token_shingles;  // k consecutive token texts joined by '\x1f', with counts
  std::set<std::string> api_types;
  std::map<std::string, int> terms;
  std::vector<std::string> warnings;  // files skipped during extraction
};

/// Lowercased words of an identifier split at camelCase humps, acronym
/// boundaries and underscores. Digit-only pieces are dropped.
std::vector<std::string> split_identifier(std::string_view identifier);

/// Shingles of one token stream; a stream with fewer than k tokens has none.
std::map<std::string, int> shingles(std::span<const Token> tokens, int k = kShingleSize);

/// Capitalized type names used in declarations, instantiations and type
/// arguments: `Foo x`, `new Foo(`, `List<Foo>`, `Foo[] xs`.
std::set<std::string> api_types(std::span<const Token> tokens);

/// Throws std::invalid_argument when `source_files` is empty or nothing in it
/// could be used. Files that lex with diagnostics are skipped with a warning.
CodingContext extract_context(const std::vector<std::string>& source_files, int k = kShingleSize);

/// Context of a question: its code blocks for shingles and types, title and
/// body words plus code identifiers for terms.
CodingContext question_context(const QuestionRecord& q, int k = kShingleSize);

struct SimilarityWeights {
  double code = 0.5;
  double api = 0.3;
  double text = 0.2;

  /// Throws std::invalid_argument unless all weights are >= 0 and sum to 1.
  void validate() const;
  bool operator==(const SimilarityWeights&) const = default;
};

struct ComponentScores {
  double code = 0.0;
  double api = 0.0;
  double text = 0.0;
  bool operator==(const ComponentScores&) const = default;
};

struct ScoredCandidate {
  std::int64_t question_id = 0;
  double similarity = 0.0;
  ComponentScores components;
  bool operator==(const ScoredCandidate&) const = default;
};

/// Inverse document frequencies over a candidate pool:
/// idf(t) = ln((1 + N) / (1 + df(t))) + 1.
class TermWeights {
 public:
  TermWeights() = default;
  explicit TermWeights(std::span<const CodingContext> pool);
  double idf(const std::string& term) const;
  std::size_t documents() const { return documents_; }

 private:
  std::map<std::string, int> df_;
  std::size_t documents_ = 0;
};

/// sum(min) / sum(max) over two multisets; 0 when both are empty.
double weighted_jaccard(const std::map<std::string, int>& a, const std::map<std::string, int>& b);
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);
double tfidf_cosine(const std::map<std::string, int>& a, const std::map<std::string, int>& b, const TermWeights& w);

ScoredCandidate similarity(const CodingContext& ctx, const QuestionRecord& q, const SimilarityWeights& weights,
                           const TermWeights& idf);

/// Scores every question against the context with IDF taken from `pool`
/// itself, sorted by similarity descending, ties by lower question id.
std::vector<ScoredCandidate> score_candidates(const CodingContext& ctx, std::span<const QuestionRecord> pool,
                                              const SimilarityWeights& weights);

struct ExpertiseProfile {
  std::set<std::string> top_tags;
  int max_suggestions_per_day = 1;
  std::optional<Timestamp> last_assignment_time;
  std::vector<Timestamp> recent_assignments;  // assignments inside the trailing day

  /// Throws std::invalid_argument when max_suggestions_per_day < 1.
  void validate() const;
  bool operator==(const ExpertiseProfile&) const = default;
};

/// True iff the question has tags and every one of them is a top tag.
bool expertise_filter(const QuestionRecord& q, const ExpertiseProfile& p);

/// True iff the question has been quiet for at least 90 days.
bool staleness_filter(const QuestionRecord& q, Timestamp now);

inline constexpr std::chrono::seconds kStaleAfter = days(90);

/// True iff fewer than max_suggestions_per_day assignments fall in (now - 24h, now].
bool rate_limit_check(const ExpertiseProfile& p, Timestamp now);

/// Adds an assignment at `now` and forgets those older than a day.
void record_assignment(ExpertiseProfile& p, Timestamp now);

inline constexpr long kMaxAssignTrials = 1'000'000;

/// Walks the candidates by descending similarity (ties by lower id), accepting
/// each with probability equal to its similarity and restarting from the top
/// after the last one. Zero-similarity candidates are skipped. After
/// kMaxAssignTrials trials the best candidate is returned. Throws
/// std::invalid_argument for an empty list and std::runtime_error
/// "no assignable candidate" when every similarity is 0.
std::int64_t assign(std::span<const ScoredCandidate> candidates, std::mt19937_64& rng);

/// Analytic distribution of assign(), aligned with the input order. With the
/// candidates ranked, P(i) = p_i * prod_{j<i}(1 - p_j) / (1 - prod_j (1 - p_j)).
std::vector<double> assignment_probabilities(std::span<const ScoredCandidate> candidates);

void to_json(nlohmann::json& j, const SimilarityWeights& w);
void from_json(const nlohmann::json& j, SimilarityWeights& w);
void to_json(nlohmann::json& j, const ScoredCandidate& c);
void from_json(const nlohmann::json& j, ScoredCandidate& c);
void to_json(nlohmann::json& j, const ExpertiseProfile& p);
void from_json(const nlohmann::json& j, ExpertiseProfile& p);

ExpertiseProfile load_profile(const std::filesystem::path& path);
void save_profile(const std::filesystem::path& path, const ExpertiseProfile& p);

}  // namespace postforge
