#include "postforge/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace postforge {

TrainingConfig TrainingConfig::defaults() {
  TrainingConfig cfg;
  cfg.cp_grid = {std::numeric_limits<double>::infinity(),
                 0.5, 0.2, 0.1, 0.05, 0.04, 0.03, 0.025, 0.02, 0.015, 0.012, 0.01, 0.0075, 0.005};
  for (int h = 0; h <= 100; h += 2) cfg.hidden_units_grid.push_back(h);
  for (int e = -15; e <= -1; ++e) cfg.gamma_grid.push_back(std::ldexp(1.0, e));
  for (int e = 0; e <= 30; e += 2) cfg.cost_grid.push_back(std::ldexp(1.0, e));
  return cfg;
}

void TrainingConfig::validate() const {
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw std::invalid_argument("split_ratio must be in (0,1)");
  if (cp_grid.empty() || hidden_units_grid.empty() || gamma_grid.empty() || cost_grid.empty()) {
    throw std::invalid_argument("tuning grids must be non-empty");
  }
  if (!std::is_sorted(cp_grid.begin(), cp_grid.end(), std::greater<>())) {
    throw std::invalid_argument("cp_grid must be descending");
  }
  if (folds < 2) throw std::invalid_argument("need at least 2 folds");
  if (svm_degree < 1) throw std::invalid_argument("svm_degree must be positive");
}

std::vector<Feature> all_features() {
  std::vector<Feature> out;
  for (std::size_t i = 0; i < kFeatureCount; ++i) out.push_back(static_cast<Feature>(i));
  return out;
}

std::pair<Dataset, Dataset> split_dataset(std::span<const LabeledExample> data, double ratio,
                                          std::uint64_t seed) {
  if (data.size() < 10) throw std::invalid_argument("split_dataset needs at least 10 examples");
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("ratio must be in (0,1)");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < data.size(); ++i) by_class[data[i].label == Label::yes].push_back(i);
  if (by_class[0].empty() || by_class[1].empty()) {
    throw std::invalid_argument("split_dataset needs both classes");
  }
  std::mt19937_64 rng(seed);
  std::vector<bool> in_train(data.size(), false);
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto take = static_cast<std::size_t>(std::llround(static_cast<double>(members.size()) * ratio));
    for (std::size_t k = 0; k < take; ++k) in_train[members[k]] = true;
  }
  std::pair<Dataset, Dataset> out;
  for (std::size_t i = 0; i < data.size(); ++i) (in_train[i] ? out.first : out.second).push_back(data[i]);
  return out;
}

std::vector<int> stratified_folds(std::span<const LabeledExample> data, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("need at least 2 folds");
  std::vector<int> fold(data.size(), 0);
  if (static_cast<std::size_t>(k) >= data.size()) {
    std::iota(fold.begin(), fold.end(), 0);
    return fold;
  }
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < data.size(); ++i) by_class[data[i].label == Label::yes].push_back(i);
  std::mt19937_64 rng(seed);
  int next = 0;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    // Continue round-robin across classes so fold sizes stay balanced.
    for (std::size_t idx : members) {
      fold[idx] = next;
      next = (next + 1) % k;
    }
  }
  return fold;
}

Standardizer Standardizer::fit(std::span<const LabeledExample> data, std::span<const Feature> features) {
  Standardizer s;
  s.features.assign(features.begin(), features.end());
  s.mean.assign(features.size(), 0.0);
  s.scale.assign(features.size(), 1.0);
  if (data.empty()) return s;
  const double n = static_cast<double>(data.size());
  for (std::size_t j = 0; j < features.size(); ++j) {
    double sum = 0.0;
    for (const auto& e : data) sum += e.features[features[j]];
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& e : data) {
      const double d = e.features[features[j]] - mean;
      sq += d * d;
    }
    const double sd = std::sqrt(sq / n);
    s.mean[j] = mean;
    s.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

std::vector<double> Standardizer::transform(const FeatureVector& fv) const {
  const FeatureArray x = fv.to_array();
  std::vector<double> out(features.size());
  for (std::size_t j = 0; j < features.size(); ++j) {
    out[j] = (x[index_of(features[j])] - mean[j]) / scale[j];
  }
  return out;
}

}  // namespace postforge
