#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "postforge/draft.hpp"
#include "postforge/matcher.hpp"
#include "postforge/model.hpp"
#include "postforge/session.hpp"
#include "postforge/store.hpp"

namespace postforge {

/// Flat "key = value" file; '#' starts a comment. Relative paths are taken
/// relative to the config file's directory.
struct PipelineConfig {
  std::filesystem::path store;
  std::filesystem::path model;
  std::filesystem::path profile;
  std::filesystem::path context;  // developer's active sources: a file or directory
  std::filesystem::path corpus;   // code searched for drafts; defaults to context
  std::filesystem::path outbox = "outbox";
  std::filesystem::path state = "state";
  SimilarityWeights weights;
  double similarity_floor = 0.05;
  int min_lines = 6;
  bool normalize = false;
  std::optional<int> rate_limit;  // overrides the profile's max_suggestions_per_day
  std::chrono::seconds retry_period = hours(6);
  bool dry_run = true;
  std::uint64_t seed = 1;
  std::string site = "stackoverflow";

  /// Value checks only. Throws std::invalid_argument.
  void validate() const;
  /// Also requires the referenced inputs to exist. Throws std::runtime_error.
  void check_paths() const;
};

PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base = {});
PipelineConfig load_config(const std::filesystem::path& path);
std::string format_config(const PipelineConfig& cfg);

/// Reads *.java files (or the single file) under `path`, sorted.
std::vector<std::string> read_sources(const std::filesystem::path& path);

/// Everything a pipeline run reads, loaded once.
struct PipelineInputs {
  std::vector<QuestionRecord> posts;
  Model model;
  ExpertiseProfile profile;
  CodingContext context;
  Corpus corpus;
};

/// Throws std::runtime_error naming the input that failed to load.
PipelineInputs load_inputs(const PipelineConfig& cfg);

/// Candidates left after each stage, in pipeline order.
struct StageCounts {
  std::size_t stored = 0;
  std::size_t stale = 0;
  std::size_t related = 0;
  std::size_t expert = 0;
  std::size_t deficient = 0;

  std::string summary() const;
  bool operator==(const StageCounts&) const = default;
};

struct NoCandidate {
  std::string reason;  // rate_limited, no_posts, staleness, similarity, expertise, classifier
  Timestamp retry_at{};
  StageCounts counts;
};

struct Selection {
  std::vector<ScoredCandidate> ranked;  // eligible posts, best first
  StageCounts counts;
};

/// The filtering part of the pipeline: stale, related (similarity >= floor),
/// within expertise, predicted deficient. Pure.
Selection select_candidates(const PipelineConfig& cfg, const PipelineInputs& in, Timestamp now);

struct PipelineRun {
  std::variant<AssignmentSession, NoCandidate> outcome;
  StageCounts counts;
};

/// Rate limit, selection, assignment and draft generation. The random stream
/// is seeded from cfg.seed and `now`, so identical inputs give identical
/// sessions. Does not record the assignment in the profile.
PipelineRun run_pipeline(const PipelineConfig& cfg, const PipelineInputs& in, Timestamp now);

/// Drafts for the session's question against the corpus; sets state drafted
/// when a snippet results, otherwise keeps the state and notes the reason.
void attach_draft(AssignmentSession& s, const QuestionRecord& q, const PipelineConfig& cfg, const Corpus& corpus,
                  Timestamp now);

}  // namespace postforge
