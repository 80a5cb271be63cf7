#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "postforge/features.hpp"
#include "postforge/training.hpp"

namespace postforge {

enum class SelectionMethod : std::uint8_t { rfe, ga, sa };

std::string_view to_string(SelectionMethod m);
SelectionMethod selection_method_from_string(std::string_view s);

struct FeatureSubset {
  std::vector<Feature> selected;  // canonical order, non-empty
  SelectionMethod method = SelectionMethod::rfe;
  std::optional<double> cv_score;  // 10-fold cross-validated F1
  std::size_t subsets_evaluated = 0;
};

/// Bit i set = feature i selected.
using FeatureMask = std::uint16_t;
std::vector<Feature> features_of(FeatureMask mask);
FeatureMask mask_of(std::span<const Feature> features);

/// Wrapper selection around a decision tree grown at cfg.selection_cp. Every
/// candidate subset is scored by pooled 10-fold cross-validated F1 on one fold
/// assignment fixed by cfg.rng_seed. Among equal scores the smaller subset
/// wins, then the lower mask.
///
/// rfe: start from all features, repeatedly drop the feature with the least
///      total impurity decrease summed over the fold trees.
/// ga:  bitmask population with tournament selection, uniform crossover,
///      per-bit mutation and two elites.
/// sa:  one bit flip per step from the full set, Metropolis acceptance on F1
///      with geometric cooling.
FeatureSubset select_features(std::span<const LabeledExample> train, SelectionMethod method,
                              const TrainingConfig& cfg, std::span<const Feature> candidates = {});

}  // namespace postforge
