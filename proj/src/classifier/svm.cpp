#include "postforge/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace postforge {

using nlohmann::json;

namespace {

constexpr double kTau = 1e-12;

std::vector<Feature> resolve(std::span<const Feature> subset) {
  std::vector<Feature> out = subset.empty() ? all_features() : std::vector<Feature>(subset.begin(), subset.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

double polynomial_kernel(std::span<const double> x, std::span<const double> y, const SvmParams& p) {
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
  return std::pow(p.gamma * dot + p.coef0, p.degree);
}

double SvmModel::decision_standardized(std::span<const double> x) const {
  double f = bias;
  for (std::size_t i = 0; i < support_vectors.size(); ++i) {
    f += coefficients[i] * polynomial_kernel(support_vectors[i], x, params);
  }
  return f;
}

double SvmModel::decision(const FeatureVector& fv) const {
  const auto x = scaler.transform(fv);
  return decision_standardized(x);
}

Prediction SvmModel::predict(const FeatureVector& fv) const {
  const double f = decision(fv);
  const double confidence = 1.0 / (1.0 + std::exp(-std::abs(f)));
  return {f > 0.0 ? Label::yes : Label::no, confidence};
}

SvmFit fit_svm(std::span<const LabeledExample> train, const SvmParams& params, std::span<const Feature> subset) {
  if (train.empty()) throw std::invalid_argument("fit_svm needs data");
  if (!(params.cost > 0.0) || !(params.gamma > 0.0) || params.degree < 1) {
    throw std::invalid_argument("invalid SVM parameters");
  }
  SvmFit fit;
  SvmModel& model = fit.model;
  model.feature_subset = resolve(subset);
  model.scaler = Standardizer::fit(train, model.feature_subset);
  model.params = params;

  const std::size_t n = train.size();
  std::vector<std::vector<double>> x(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = model.scaler.transform(train[i].features);
    y[i] = train[i].label == Label::yes ? 1.0 : -1.0;
  }
  // Q_ij = y_i y_j K(x_i, x_j)
  std::vector<double> q(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = y[i] * y[j] * polynomial_kernel(x[i], x[j], params);
      q[i * n + j] = v;
      q[j * n + i] = v;
    }
  }
  const double c = params.cost;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // gradient of 0.5 a'Qa - e'a
  auto upper = [&](std::size_t t) { return alpha[t] >= c; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  double gap = std::numeric_limits<double>::infinity();
  std::int64_t iter = 0;
  for (; iter < params.max_iterations; ++iter) {
    double g_max = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i_sel = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (!upper(t) && -grad[t] >= g_max) { g_max = -grad[t]; i_sel = static_cast<std::ptrdiff_t>(t); }
      } else {
        if (!lower(t) && grad[t] >= g_max) { g_max = grad[t]; i_sel = static_cast<std::ptrdiff_t>(t); }
      }
    }
    double g_max2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t j_sel = -1;
    double best_obj = std::numeric_limits<double>::infinity();
    if (i_sel >= 0) {
      const auto i = static_cast<std::size_t>(i_sel);
      for (std::size_t t = 0; t < n; ++t) {
        if (y[t] > 0) {
          if (lower(t)) continue;
          const double diff = g_max + grad[t];
          g_max2 = std::max(g_max2, grad[t]);
          if (diff > 0) {
            double quad = q[i * n + i] + q[t * n + t] - 2.0 * y[i] * q[i * n + t];
            const double obj = -(diff * diff) / (quad > 0 ? quad : kTau);
            if (obj <= best_obj) { best_obj = obj; j_sel = static_cast<std::ptrdiff_t>(t); }
          }
        } else {
          if (upper(t)) continue;
          const double diff = g_max - grad[t];
          g_max2 = std::max(g_max2, -grad[t]);
          if (diff > 0) {
            double quad = q[i * n + i] + q[t * n + t] + 2.0 * y[i] * q[i * n + t];
            const double obj = -(diff * diff) / (quad > 0 ? quad : kTau);
            if (obj <= best_obj) { best_obj = obj; j_sel = static_cast<std::ptrdiff_t>(t); }
          }
        }
      }
    }
    gap = g_max + g_max2;
    if (i_sel < 0 || j_sel < 0 || gap < params.tolerance) break;

    const auto i = static_cast<std::size_t>(i_sel);
    const auto j = static_cast<std::size_t>(j_sel);
    const double old_i = alpha[i];
    const double old_j = alpha[j];
    if (y[i] != y[j]) {
      double quad = q[i * n + i] + q[j * n + j] + 2.0 * q[i * n + j];
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
      }
      if (diff > 0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
      }
    } else {
      double quad = q[i * n + i] + q[j * n + j] - 2.0 * q[i * n + j];
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; }
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; }
      }
    }
    const double d_i = alpha[i] - old_i;
    const double d_j = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q[i * n + t] * d_i + q[j * n + t] * d_j;
  }
  if (!(gap < params.tolerance)) {
    throw SvmNotConverged("SMO did not converge in " + std::to_string(iter) +
                              " iterations; KKT residual " + std::to_string(gap),
                          gap);
  }

  // rho: average of y_i * grad_i over free vectors, else midpoint of bounds.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (ub + lb) / 2.0;
  model.bias = -rho;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      model.support_vectors.push_back(x[t]);
      model.coefficients.push_back(alpha[t] * y[t]);
    }
  }
  fit.alpha = std::move(alpha);
  fit.kkt_residual = gap;
  fit.iterations = iter;
  return fit;
}

SvmModel train_svm(std::span<const LabeledExample> train, double gamma, double cost, int degree,
                   const TrainingConfig& cfg, std::span<const Feature> subset) {
  SvmParams params;
  params.gamma = gamma;
  params.cost = cost;
  params.degree = degree;
  params.coef0 = cfg.svm_coef0;
  return fit_svm(train, params, subset).model;
}

void to_json(json& j, const SvmModel& m) {
  json subset = json::array();
  for (Feature f : m.feature_subset) subset.push_back(feature_name(f));
  j = json{{"feature_subset", subset},
           {"scaler", {{"mean", m.scaler.mean}, {"scale", m.scaler.scale}}},
           {"params",
            {{"kernel", "polynomial"},
             {"gamma", m.params.gamma},
             {"cost", m.params.cost},
             {"degree", m.params.degree},
             {"coef0", m.params.coef0},
             {"tolerance", m.params.tolerance}}},
           {"support_vectors", m.support_vectors},
           {"coefficients", m.coefficients},
           {"bias", m.bias}};
}

void from_json(const json& j, SvmModel& m) {
  m = SvmModel{};
  for (const auto& name : j.at("feature_subset")) m.feature_subset.push_back(feature_from_name(name.get<std::string>()));
  m.scaler.features = m.feature_subset;
  j.at("scaler").at("mean").get_to(m.scaler.mean);
  j.at("scaler").at("scale").get_to(m.scaler.scale);
  const auto& p = j.at("params");
  m.params.gamma = p.at("gamma").get<double>();
  m.params.cost = p.at("cost").get<double>();
  m.params.degree = p.at("degree").get<int>();
  m.params.coef0 = p.value("coef0", 1.0);
  m.params.tolerance = p.value("tolerance", 1e-4);
  j.at("support_vectors").get_to(m.support_vectors);
  j.at("coefficients").get_to(m.coefficients);
  j.at("bias").get_to(m.bias);
  if (m.support_vectors.size() != m.coefficients.size()) throw std::invalid_argument("inconsistent SVM model");
}

}  // namespace postforge
