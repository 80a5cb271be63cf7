#pragma once

#include <algorithm>
#include <cstdint>
#include <future>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "postforge/features.hpp"

namespace postforge {

enum class TuningMode : std::uint8_t { loocv, kfold };

struct TreeParams {
  std::size_t min_leaf = 5;
  int max_depth = 20;
  bool operator==(const TreeParams&) const = default;
};

struct MlpParams {
  double learning_rate = 0.1;
  int max_epochs = 200;
  std::size_t batch_size = 32;
};

struct TrainingConfig {
  double split_ratio = 0.8;
  std::uint64_t rng_seed = 1;
  TuningMode tuning_mode = TuningMode::kfold;
  int folds = 10;
  // Descending; infinity is allowed and means "never split".
  std::vector<double> cp_grid;
  std::vector<int> hidden_units_grid;
  std::vector<double> gamma_grid;
  std::vector<double> cost_grid;
  int svm_degree = 3;
  double svm_coef0 = 1.0;
  TreeParams tree;
  MlpParams mlp;

  // Feature selection.
  double selection_cp = 0.012;
  int ga_population = 20;
  int ga_generations = 15;
  double ga_mutation_rate = 1.0 / 11.0;
  int sa_steps = 80;
  double sa_initial_temperature = 0.02;
  double sa_cooling = 0.95;

  /// Grids covering the searched ranges: cp from infinity down to 0.005,
  /// hidden units 0..100, gamma 2^-15..2^-1, cost 2^0..2^30.
  static TrainingConfig defaults();

  /// Throws std::invalid_argument on empty grids, a non-descending cp grid or
  /// a split ratio outside (0, 1).
  void validate() const;
};

std::vector<Feature> all_features();

/// Stratified by label, deterministic for a seed. Each class contributes
/// round(n_class * ratio) examples to train. Original order is kept inside
/// each part. Requires at least 10 examples and both classes.
std::pair<Dataset, Dataset> split_dataset(std::span<const LabeledExample> data, double ratio,
                                          std::uint64_t seed);

/// Stratified fold index per example (0..k-1), deterministic for a seed.
/// k >= n gives leave-one-out.
std::vector<int> stratified_folds(std::span<const LabeledExample> data, int k, std::uint64_t seed);

/// Calls fn(0), ..., fn(count - 1) on a few worker threads and returns the
/// results in index order, so reductions stay bitwise reproducible.
template <class Fn>
auto map_folds(int count, Fn fn) -> std::vector<decltype(fn(0))> {
  std::vector<decltype(fn(0))> out(static_cast<std::size_t>(std::max(count, 0)));
  const int workers = static_cast<int>(std::max(1u, std::min(std::thread::hardware_concurrency(), 8u)));
  for (int start = 0; start < count; start += workers) {
    std::vector<std::future<decltype(fn(0))>> pending;
    for (int f = start; f < std::min(count, start + workers); ++f) {
      pending.push_back(std::async(std::launch::async, fn, f));
    }
    for (std::size_t p = 0; p < pending.size(); ++p) out[static_cast<std::size_t>(start) + p] = pending[p].get();
  }
  return out;
}

/// Mean and standard deviation per selected feature, from training data.
struct Standardizer {
  std::vector<Feature> features;
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(std::span<const LabeledExample> data, std::span<const Feature> features);
  std::vector<double> transform(const FeatureVector& fv) const;
};

}  // namespace postforge
