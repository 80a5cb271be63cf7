#include "postforge/metrics.hpp"

#include <cstdio>
#include <stdexcept>

namespace postforge {

void Confusion::add(Label predicted, Label truth) {
  if (predicted == Label::yes) {
    ++(truth == Label::yes ? tp : fp);
  } else {
    ++(truth == Label::yes ? fn : tn);
  }
}

namespace {

std::optional<double> ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

EvalMetrics metrics_from_confusion(const Confusion& c) {
  EvalMetrics m;
  m.confusion = c;
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.specificity = ratio(c.tn, c.tn + c.fp);
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.accuracy = ratio(c.tp + c.tn, c.total());
  if (m.recall && m.specificity) {
    // (tp/(tp+fn) + tn/(tn+fp)) / 2 over a common denominator.
    const std::int64_t pos = c.tp + c.fn;
    const std::int64_t neg = c.tn + c.fp;
    m.balanced_accuracy = ratio(c.tp * neg + c.tn * pos, 2 * pos * neg);
  }
  if (m.precision && m.recall && (c.tp > 0)) {
    m.f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
  }
  // kappa = 2(tp*tn - fn*fp) / ((tp+fp)(fp+tn) + (tp+fn)(fn+tn))
  const std::int64_t kappa_den = (c.tp + c.fp) * (c.fp + c.tn) + (c.tp + c.fn) * (c.fn + c.tn);
  m.kappa = ratio(2 * (c.tp * c.tn - c.fn * c.fp), kappa_den);
  return m;
}

EvalMetrics evaluate(std::span<const std::pair<Label, Label>> predictions) {
  if (predictions.empty()) throw std::invalid_argument("evaluate needs at least one prediction");
  Confusion c;
  for (const auto& [predicted, truth] : predictions) c.add(predicted, truth);
  return metrics_from_confusion(c);
}

std::string EvalMetrics::to_string() const {
  auto fmt = [](const std::optional<double>& v) {
    if (!v) return std::string("undefined");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return std::string(buf);
  };
  return "tp=" + std::to_string(confusion.tp) + " fp=" + std::to_string(confusion.fp) +
         " fn=" + std::to_string(confusion.fn) + " tn=" + std::to_string(confusion.tn) +
         " recall=" + fmt(recall) + " precision=" + fmt(precision) +
         " balanced_accuracy=" + fmt(balanced_accuracy) + " kappa=" + fmt(kappa) + " f1=" + fmt(f1) +
         " accuracy=" + fmt(accuracy);
}

}  // namespace postforge
