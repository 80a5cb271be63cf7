#include "postforge/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace postforge {

using nlohmann::json;

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// -log(sigmoid(z)) for the true class, computed stably from the logit.
double logistic_loss(double z, bool positive) {
  const double m = positive ? -z : z;  // loss = log(1 + exp(m))
  return m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
}

struct Forward {
  std::vector<double> hidden;
  double logit = 0.0;
};

Forward forward(const MlpModel& m, std::span<const double> x) {
  Forward f;
  const std::size_t d = m.inputs();
  if (m.hidden_units == 0) {
    f.logit = m.b_out;
    for (std::size_t j = 0; j < d; ++j) f.logit += m.w_out[j] * x[j];
    return f;
  }
  const auto h = static_cast<std::size_t>(m.hidden_units);
  f.hidden.resize(h);
  f.logit = m.b_out;
  for (std::size_t u = 0; u < h; ++u) {
    double z = m.b_hidden[u];
    for (std::size_t j = 0; j < d; ++j) z += m.w_hidden[u * d + j] * x[j];
    f.hidden[u] = sigmoid(z);
    f.logit += m.w_out[u] * f.hidden[u];
  }
  return f;
}

std::vector<Feature> resolve(std::span<const Feature> subset) {
  std::vector<Feature> out = subset.empty() ? all_features() : std::vector<Feature>(subset.begin(), subset.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

double MlpModel::probability_standardized(std::span<const double> x) const {
  return sigmoid(forward(*this, x).logit);
}

double MlpModel::probability(const FeatureVector& fv) const {
  const auto x = scaler.transform(fv);
  return probability_standardized(x);
}

Prediction MlpModel::predict(const FeatureVector& fv) const {
  const double p = probability(fv);
  return p >= 0.5 ? Prediction{Label::yes, p} : Prediction{Label::no, 1.0 - p};
}

std::vector<double> MlpModel::parameters() const {
  std::vector<double> p;
  p.reserve(w_hidden.size() + b_hidden.size() + w_out.size() + 1);
  p.insert(p.end(), w_hidden.begin(), w_hidden.end());
  p.insert(p.end(), b_hidden.begin(), b_hidden.end());
  p.insert(p.end(), w_out.begin(), w_out.end());
  p.push_back(b_out);
  return p;
}

void MlpModel::set_parameters(std::span<const double> p) {
  if (p.size() != w_hidden.size() + b_hidden.size() + w_out.size() + 1) {
    throw std::invalid_argument("parameter vector size mismatch");
  }
  auto it = p.begin();
  std::copy_n(it, w_hidden.size(), w_hidden.begin());
  it += static_cast<std::ptrdiff_t>(w_hidden.size());
  std::copy_n(it, b_hidden.size(), b_hidden.begin());
  it += static_cast<std::ptrdiff_t>(b_hidden.size());
  std::copy_n(it, w_out.size(), w_out.begin());
  it += static_cast<std::ptrdiff_t>(w_out.size());
  b_out = *it;
}

double mlp_loss_gradient(const MlpModel& m, std::span<const std::vector<double>> inputs,
                         std::span<const Label> labels, std::vector<double>& gradient) {
  if (inputs.size() != labels.size() || inputs.empty()) throw std::invalid_argument("bad batch");
  const std::size_t d = m.inputs();
  const auto h = static_cast<std::size_t>(m.hidden_units);
  const std::size_t off_b_hidden = m.w_hidden.size();
  const std::size_t off_w_out = off_b_hidden + m.b_hidden.size();
  const std::size_t off_b_out = off_w_out + m.w_out.size();
  gradient.assign(off_b_out + 1, 0.0);

  double loss = 0.0;
  for (std::size_t n = 0; n < inputs.size(); ++n) {
    const auto& x = inputs[n];
    const bool positive = labels[n] == Label::yes;
    const Forward f = forward(m, x);
    loss += logistic_loss(f.logit, positive);
    const double delta_out = sigmoid(f.logit) - (positive ? 1.0 : 0.0);
    gradient[off_b_out] += delta_out;
    if (h == 0) {
      for (std::size_t j = 0; j < d; ++j) gradient[off_w_out + j] += delta_out * x[j];
      continue;
    }
    for (std::size_t u = 0; u < h; ++u) {
      gradient[off_w_out + u] += delta_out * f.hidden[u];
      const double delta_hidden = delta_out * m.w_out[u] * f.hidden[u] * (1.0 - f.hidden[u]);
      gradient[off_b_hidden + u] += delta_hidden;
      for (std::size_t j = 0; j < d; ++j) gradient[u * d + j] += delta_hidden * x[j];
    }
  }
  const double scale = 1.0 / static_cast<double>(inputs.size());
  for (double& g : gradient) g *= scale;
  return loss * scale;
}

MlpModel train_mlp(std::span<const LabeledExample> train, int hidden_units, const TrainingConfig& cfg,
                   std::span<const Feature> subset) {
  if (train.empty()) throw std::invalid_argument("train_mlp needs data");
  if (hidden_units < 0) throw std::invalid_argument("hidden_units must be >= 0");
  MlpModel m;
  m.feature_subset = resolve(subset);
  m.scaler = Standardizer::fit(train, m.feature_subset);
  m.hidden_units = hidden_units;
  m.params = cfg.mlp;
  m.seed = cfg.rng_seed;

  const std::size_t d = m.inputs();
  const auto h = static_cast<std::size_t>(hidden_units);
  std::mt19937_64 rng(cfg.rng_seed);
  auto uniform = [&](double limit) { return std::uniform_real_distribution<double>(-limit, limit)(rng); };
  if (h == 0) {
    m.w_out.assign(d, 0.0);
    for (double& w : m.w_out) w = uniform(std::sqrt(6.0 / static_cast<double>(d + 1)));
  } else {
    m.w_hidden.resize(h * d);
    m.b_hidden.assign(h, 0.0);
    m.w_out.resize(h);
    for (double& w : m.w_hidden) w = uniform(std::sqrt(6.0 / static_cast<double>(d + h)));
    for (double& w : m.w_out) w = uniform(std::sqrt(6.0 / static_cast<double>(h + 1)));
  }

  std::vector<std::vector<double>> inputs;
  std::vector<Label> labels;
  for (const auto& e : train) {
    inputs.push_back(m.scaler.transform(e.features));
    labels.push_back(e.label);
  }

  std::vector<double> gradient;
  std::vector<double> full_gradient;
  double previous = mlp_loss_gradient(m, inputs, labels, full_gradient);
  if (!std::isfinite(previous)) throw TrainingDiverged("initial loss is not finite");
  double lr = cfg.mlp.learning_rate;
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::max<std::size_t>(1, cfg.mlp.batch_size);

  for (int epoch = 0; epoch < cfg.mlp.max_epochs; ++epoch) {
    const std::vector<double> snapshot = m.parameters();
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> params = snapshot;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      std::vector<std::vector<double>> xb;
      std::vector<Label> yb;
      for (std::size_t k = start; k < end; ++k) {
        xb.push_back(inputs[order[k]]);
        yb.push_back(labels[order[k]]);
      }
      mlp_loss_gradient(m, xb, yb, gradient);
      for (std::size_t p = 0; p < params.size(); ++p) params[p] -= lr * gradient[p];
      m.set_parameters(params);
    }
    const double loss = mlp_loss_gradient(m, inputs, labels, full_gradient);
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "non-finite loss at epoch " << epoch << " (learning rate " << lr << ", previous loss "
          << previous << ")";
      throw TrainingDiverged(msg.str());
    }
    if (loss > previous) {
      m.set_parameters(snapshot);
      lr /= 2.0;
      m.loss_history.push_back(previous);
      if (lr < 1e-9) break;
      continue;
    }
    previous = loss;
    m.loss_history.push_back(loss);
  }
  return m;
}

void to_json(json& j, const MlpModel& m) {
  json subset = json::array();
  for (Feature f : m.feature_subset) subset.push_back(feature_name(f));
  j = json{{"feature_subset", subset},
           {"scaler", {{"mean", m.scaler.mean}, {"scale", m.scaler.scale}}},
           {"hidden_units", m.hidden_units},
           {"w_hidden", m.w_hidden},
           {"b_hidden", m.b_hidden},
           {"w_out", m.w_out},
           {"b_out", m.b_out},
           {"params",
            {{"learning_rate", m.params.learning_rate},
             {"max_epochs", m.params.max_epochs},
             {"batch_size", m.params.batch_size},
             {"activation", "logistic"},
             {"loss", "cross_entropy"},
             {"schedule", "halve_on_increase"}}},
           {"seed", m.seed},
           {"loss_history", m.loss_history}};
}

void from_json(const json& j, MlpModel& m) {
  m = MlpModel{};
  for (const auto& name : j.at("feature_subset")) m.feature_subset.push_back(feature_from_name(name.get<std::string>()));
  m.scaler.features = m.feature_subset;
  j.at("scaler").at("mean").get_to(m.scaler.mean);
  j.at("scaler").at("scale").get_to(m.scaler.scale);
  j.at("hidden_units").get_to(m.hidden_units);
  j.at("w_hidden").get_to(m.w_hidden);
  j.at("b_hidden").get_to(m.b_hidden);
  j.at("w_out").get_to(m.w_out);
  j.at("b_out").get_to(m.b_out);
  const auto& p = j.at("params");
  m.params.learning_rate = p.value("learning_rate", 0.1);
  m.params.max_epochs = p.value("max_epochs", 200);
  m.params.batch_size = p.value("batch_size", std::size_t{32});
  m.seed = j.value("seed", std::uint64_t{0});
  m.loss_history = j.value("loss_history", std::vector<double>{});
  const std::size_t d = m.feature_subset.size();
  const auto h = static_cast<std::size_t>(m.hidden_units);
  if (m.scaler.mean.size() != d || m.scaler.scale.size() != d || m.w_hidden.size() != h * d ||
      m.b_hidden.size() != h || m.w_out.size() != (h == 0 ? d : h)) {
    throw std::invalid_argument("inconsistent MLP model dimensions");
  }
}

}  // namespace postforge
