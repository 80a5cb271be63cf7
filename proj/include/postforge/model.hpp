#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "postforge/metrics.hpp"
#include "postforge/mlp.hpp"
#include "postforge/svm.hpp"
#include "postforge/training.hpp"
#include "postforge/tree.hpp"

namespace postforge {

using Model = std::variant<DecisionTreeModel, MlpModel, SvmModel>;

/// "dt", "mlp" or "svm".
std::string model_kind(const Model& m);
Prediction predict(const Model& m, const FeatureVector& fv);
const std::vector<Feature>& model_features(const Model& m);

/// Predicts every example and scores against its label.
EvalMetrics evaluate_model(const Model& m, std::span<const LabeledExample> data);

nlohmann::json config_to_json(const TrainingConfig& cfg);
TrainingConfig config_from_json(const nlohmann::json& j);

/// {"kind": ..., "config": ..., "model": ...}
nlohmann::json model_to_json(const Model& m, const TrainingConfig& cfg);
Model model_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const Model& m, const TrainingConfig& cfg);
Model load_model(const std::filesystem::path& path);

/// Pooled cross-validated confusion of a training procedure.
template <class Train>
Confusion cross_validate(std::span<const LabeledExample> data, std::span<const int> fold, Train train) {
  const int count = fold.empty() ? 0 : *std::max_element(fold.begin(), fold.end()) + 1;
  auto run = [&](int f) {
    Dataset fit;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (fold[i] == f) held.push_back(i);
      else fit.push_back(data[i]);
    }
    Confusion c;
    if (held.empty() || fit.empty()) return c;
    const auto model = train(std::span<const LabeledExample>(fit));
    for (std::size_t i : held) c.add(model.predict(data[i].features).label, data[i].label);
    return c;
  };
  Confusion total;
  for (const auto& c : map_folds(count, run)) total += c;
  return total;
}

struct GridScore {
  std::vector<double> point;
  std::optional<double> f1;
};

struct HiddenUnitsTuning {
  int best = 0;
  std::vector<GridScore> scores;
};

/// Cross-validated F1 over cfg.hidden_units_grid; ties go to fewer units.
HiddenUnitsTuning tune_hidden_units(std::span<const LabeledExample> train, const TrainingConfig& cfg,
                                    std::span<const Feature> subset = {});

struct SvmTuning {
  double gamma = 0.0;
  double cost = 0.0;
  std::vector<GridScore> scores;  // point = {gamma, cost}; f1 empty if SMO failed
};

/// Cross-validated F1 over gamma_grid x cost_grid; ties go to the earlier
/// grid point (smaller gamma, then smaller cost).
SvmTuning tune_svm(std::span<const LabeledExample> train, const TrainingConfig& cfg,
                   std::span<const Feature> subset = {});

}  // namespace postforge
