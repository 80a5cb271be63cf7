#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "postforge/features.hpp"

namespace postforge {

/// YES (deficient) is the positive class.
struct Confusion {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  void add(Label predicted, Label truth);
  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const Confusion&) const = default;
};

/// Ratios with a zero denominator are nullopt ("undefined"), never 0.
struct EvalMetrics {
  Confusion confusion;
  std::optional<double> recall;  // sensitivity
  std::optional<double> specificity;
  std::optional<double> precision;
  std::optional<double> accuracy;
  std::optional<double> balanced_accuracy;
  std::optional<double> kappa;
  std::optional<double> f1;

  std::string to_string() const;
};

EvalMetrics metrics_from_confusion(const Confusion& c);

/// Each pair is (predicted, truth). Throws on an empty list.
EvalMetrics evaluate(std::span<const std::pair<Label, Label>> predictions);

}  // namespace postforge
