#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "postforge/records.hpp"

namespace postforge {

/// The eleven post properties, in the canonical column order.
enum class Feature : std::uint8_t { haa, ac, s, sas, vc, ssvc, cc, fc, acc, aar, ar };

inline constexpr std::size_t kFeatureCount = 11;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "haa", "ac", "s", "sas", "vc", "ssvc", "cc", "fc", "acc", "aar", "ar"};

std::string_view feature_name(Feature f);
/// Throws std::invalid_argument for unknown names.
Feature feature_from_name(std::string_view name);
constexpr std::size_t index_of(Feature f) { return static_cast<std::size_t>(f); }

using FeatureArray = std::array<double, kFeatureCount>;

/// Bits recording which zero conventions were applied.
enum DegenerateFlag : std::uint8_t {
  kNoAnswers = 1u << 0,  // acc, aar and sas forced to 0
  kNoViews = 1u << 1,    // ssvc forced to 0
};

struct FeatureVector {
  bool haa = false;
  std::int64_t ac = 0;
  std::int64_t s = 0;
  std::int64_t sas = 0;
  std::int64_t vc = 0;
  double ssvc = 0.0;
  std::int64_t cc = 0;
  std::int64_t fc = 0;
  double acc = 0.0;
  double aar = 0.0;
  std::int64_t ar = 0;
  std::uint8_t degenerate = 0;

  FeatureArray to_array() const;
  static FeatureVector from_array(const FeatureArray& values);
  double operator[](Feature f) const { return to_array()[index_of(f)]; }

  bool operator==(const FeatureVector&) const = default;
};

/// Computes all eleven properties. Pure. HAA follows the presence of
/// accepted_answer_id (even when dangling) but is false without answers.
FeatureVector extract_features(const QuestionRecord& q);

enum class Label : std::uint8_t { no = 0, yes = 1 };

std::string_view to_string(Label label);
Label label_from_string(std::string_view text);

enum class Provenance : std::uint8_t { manual, synthetic };

struct LabeledExample {
  std::int64_t question_id = 0;
  FeatureVector features;
  Label label = Label::no;
  Provenance provenance = Provenance::manual;

  bool operator==(const LabeledExample&) const = default;
};

using Dataset = std::vector<LabeledExample>;

/// Optional per-vote annotations on the four quality criteria.
struct CriteriaNotes {
  std::optional<bool> complete;
  std::optional<bool> concise;
  std::optional<bool> correct;
  std::optional<bool> comprehensible;
};

struct VoteSheet {
  std::int64_t question_id = 0;
  std::vector<Label> votes;
  std::vector<CriteriaNotes> notes;  // parallel to votes, may be empty
  std::optional<Label> override_label;  // outcome of an external review
};

enum class LabelDecision : std::uint8_t { yes, no, needs_review };

std::string_view to_string(LabelDecision d);

/// Unanimous sheets resolve; mixed ones need review. Throws
/// std::invalid_argument("unresolvable sheet") with fewer than three votes.
LabelDecision aggregate_labels(const VoteSheet& sheet);

/// Resolves a sheet including its manual override, if any.
std::optional<Label> resolve_label(const VoteSheet& sheet);

/// Reads a votes file: one JSON object per line,
/// {"question_id": 1, "votes": ["YES","NO",...], "override": "YES"}.
std::vector<VoteSheet> read_vote_sheets(const std::string& path);

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double v) const { return v >= lower && v <= upper; }
};

/// Linear-interpolation quantile (type 7) of unsorted values, p in [0,1].
double quantile(std::vector<double> values, double p);

/// [Q1 - factor*IQR, Q3 + factor*IQR]. Requires at least four values.
Bounds iqr_bounds(std::span<const double> values, double factor = 1.5);

struct Histogram {
  std::vector<double> edges;  // counts.size() + 1 entries; last bin is closed
  std::vector<std::size_t> counts;
};

struct FeatureClassSummary {
  Feature feature;
  Label label;
  std::optional<Bounds> bounds;  // absent when the class had fewer than four values
  std::size_t total = 0;
  std::size_t retained = 0;
  std::size_t removed = 0;
  Histogram histogram;
};

struct DistributionReport {
  std::vector<FeatureClassSummary> entries;  // feature-major, YES before NO
  std::vector<std::string> warnings;

  const FeatureClassSummary& at(Feature f, Label label) const;
  /// Tab-separated: feature, class, lower, upper, total, retained, removed,
  /// bin_lo, bin_hi, count (one row per bin).
  void write_tsv(std::ostream& out) const;
};

/// Per feature and class: removes IQR outliers, then histograms the retained
/// values over bin edges shared by both classes. Boolean HAA uses two bins.
DistributionReport summarize(std::span<const LabeledExample> dataset, double factor = 1.5,
                             std::size_t bins = 10);

/// Drops examples with any feature outside the dataset-wide IQR bounds.
/// Used only when training is explicitly asked to filter outliers.
Dataset filter_outliers(std::span<const LabeledExample> dataset, double factor = 1.5);

/// Rounds to 12 significant digits, the precision used when serializing ssvc.
double round_significant(double value, int digits = 12);

void to_json(nlohmann::json& j, const FeatureVector& fv);
void from_json(const nlohmann::json& j, FeatureVector& fv);
void to_json(nlohmann::json& j, const LabeledExample& e);
void from_json(const nlohmann::json& j, LabeledExample& e);

/// Dataset files: a leading {"meta": {...}} line, then one example per line.
void write_dataset(const std::string& path, std::span<const LabeledExample> dataset);
Dataset read_dataset(const std::string& path);

}  // namespace postforge
