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

struct SvmParams {
  double gamma = 1.0 / 32.0;
  double cost = 262144.0;
  int degree = 3;
  double coef0 = 1.0;
  double tolerance = 1e-4;  // stop when the maximal KKT violation drops below this
  std::int64_t max_iterations = 10'000'000;
};

/// (gamma * <x, y> + coef0) ^ degree
double polynomial_kernel(std::span<const double> x, std::span<const double> y, const SvmParams& p);

struct SvmModel {
  std::vector<Feature> feature_subset;
  Standardizer scaler;
  SvmParams params;
  std::vector<std::vector<double>> support_vectors;  // standardized
  std::vector<double> coefficients;                 // alpha_i * y_i
  double bias = 0.0;                                // f(x) = sum coef K(sv, x) + bias

  double decision_standardized(std::span<const double> x) const;
  double decision(const FeatureVector& fv) const;
  Prediction predict(const FeatureVector& fv) const;
};

class SvmNotConverged : public std::runtime_error {
 public:
  SvmNotConverged(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double kkt_residual() const { return residual_; }

 private:
  double residual_;
};

struct SvmFit {
  SvmModel model;
  std::vector<double> alpha;  // dual variables, one per training example
  double kkt_residual = 0.0;  // max violating pair gap at termination
  std::int64_t iterations = 0;
};

/// Soft-margin C-SVM with a polynomial kernel, solved by sequential minimal
/// optimization with second-order working-set selection.
SvmFit fit_svm(std::span<const LabeledExample> train, const SvmParams& params,
               std::span<const Feature> subset = {});

/// Same, keeping only the model. gamma/cost/degree override cfg.
SvmModel train_svm(std::span<const LabeledExample> train, double gamma, double cost, int degree,
                   const TrainingConfig& cfg, std::span<const Feature> subset = {});

void to_json(nlohmann::json& j, const SvmModel& m);
void from_json(const nlohmann::json& j, SvmModel& m);

}  // namespace postforge
