#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "postforge/features.hpp"
#include "postforge/training.hpp"
#include "postforge/tree.hpp"

namespace postforge {

/// Raised when the loss becomes NaN or infinite.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One hidden layer of logistic units feeding a single logistic output.
/// hidden_units == 0 degenerates to logistic regression on the inputs.
struct MlpModel {
  std::vector<Feature> feature_subset;
  Standardizer scaler;
  int hidden_units = 0;
  // Hidden layer: hidden_units x inputs, row-major, plus biases.
  std::vector<double> w_hidden;
  std::vector<double> b_hidden;
  // Output layer: one weight per hidden unit (or per input when hidden_units == 0).
  std::vector<double> w_out;
  double b_out = 0.0;
  MlpParams params;
  std::uint64_t seed = 0;
  std::vector<double> loss_history;  // full-batch loss per epoch, non-increasing

  std::size_t inputs() const { return feature_subset.size(); }

  /// P(YES) for already-standardized inputs.
  double probability_standardized(std::span<const double> x) const;
  double probability(const FeatureVector& fv) const;
  Prediction predict(const FeatureVector& fv) const;

  /// All weights flattened: w_hidden, b_hidden, w_out, b_out.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> p);
};

/// Mean binary cross-entropy over the batch and its gradient with respect to
/// parameters() (same layout). Inputs are standardized rows.
double mlp_loss_gradient(const MlpModel& model, std::span<const std::vector<double>> inputs,
                         std::span<const Label> labels, std::vector<double>& gradient);

/// Mini-batch gradient descent with seeded initialization. After each epoch the
/// full training loss is measured; if it rose, the epoch is undone and the
/// learning rate halved.
MlpModel train_mlp(std::span<const LabeledExample> train, int hidden_units, const TrainingConfig& cfg,
                   std::span<const Feature> subset = {});

void to_json(nlohmann::json& j, const MlpModel& m);
void from_json(const nlohmann::json& j, MlpModel& m);

}  // namespace postforge
