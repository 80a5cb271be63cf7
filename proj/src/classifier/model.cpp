#include "postforge/model.hpp"

#include <fstream>
#include <sstream>

#include "postforge/store.hpp"

namespace postforge {

using nlohmann::json;

std::string model_kind(const Model& m) {
  switch (m.index()) {
    case 0: return "dt";
    case 1: return "mlp";
    default: return "svm";
  }
}

Prediction predict(const Model& m, const FeatureVector& fv) {
  return std::visit([&](const auto& model) { return model.predict(fv); }, m);
}

const std::vector<Feature>& model_features(const Model& m) {
  return std::visit([](const auto& model) -> const std::vector<Feature>& { return model.feature_subset; }, m);
}

EvalMetrics evaluate_model(const Model& m, std::span<const LabeledExample> data) {
  std::vector<std::pair<Label, Label>> pairs;
  pairs.reserve(data.size());
  for (const auto& e : data) pairs.emplace_back(predict(m, e.features).label, e.label);
  return evaluate(pairs);
}

json config_to_json(const TrainingConfig& cfg) {
  json cp = json::array();
  for (double v : cfg.cp_grid) cp.push_back(encode_cp(v));
  return json{{"split_ratio", cfg.split_ratio},
              {"rng_seed", cfg.rng_seed},
              {"tuning_mode", cfg.tuning_mode == TuningMode::loocv ? "loocv" : "kfold"},
              {"folds", cfg.folds},
              {"cp_grid", cp},
              {"hidden_units_grid", cfg.hidden_units_grid},
              {"gamma_grid", cfg.gamma_grid},
              {"cost_grid", cfg.cost_grid},
              {"svm_degree", cfg.svm_degree},
              {"svm_coef0", cfg.svm_coef0},
              {"tree", {{"min_leaf", cfg.tree.min_leaf}, {"max_depth", cfg.tree.max_depth}}},
              {"mlp",
               {{"learning_rate", cfg.mlp.learning_rate},
                {"max_epochs", cfg.mlp.max_epochs},
                {"batch_size", cfg.mlp.batch_size}}},
              {"standardize", "training mean / standard deviation"}};
}

TrainingConfig config_from_json(const json& j) {
  TrainingConfig cfg = TrainingConfig::defaults();
  cfg.split_ratio = j.value("split_ratio", cfg.split_ratio);
  cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
  cfg.tuning_mode = j.value("tuning_mode", std::string("kfold")) == "loocv" ? TuningMode::loocv : TuningMode::kfold;
  cfg.folds = j.value("folds", cfg.folds);
  if (j.contains("cp_grid")) {
    cfg.cp_grid.clear();
    for (const auto& v : j.at("cp_grid")) cfg.cp_grid.push_back(decode_cp(v));
  }
  cfg.hidden_units_grid = j.value("hidden_units_grid", cfg.hidden_units_grid);
  cfg.gamma_grid = j.value("gamma_grid", cfg.gamma_grid);
  cfg.cost_grid = j.value("cost_grid", cfg.cost_grid);
  cfg.svm_degree = j.value("svm_degree", cfg.svm_degree);
  cfg.svm_coef0 = j.value("svm_coef0", cfg.svm_coef0);
  if (j.contains("tree")) {
    cfg.tree.min_leaf = j["tree"].value("min_leaf", cfg.tree.min_leaf);
    cfg.tree.max_depth = j["tree"].value("max_depth", cfg.tree.max_depth);
  }
  if (j.contains("mlp")) {
    cfg.mlp.learning_rate = j["mlp"].value("learning_rate", cfg.mlp.learning_rate);
    cfg.mlp.max_epochs = j["mlp"].value("max_epochs", cfg.mlp.max_epochs);
    cfg.mlp.batch_size = j["mlp"].value("batch_size", cfg.mlp.batch_size);
  }
  return cfg;
}

json model_to_json(const Model& m, const TrainingConfig& cfg) {
  json body;
  std::visit([&](const auto& model) { body = model; }, m);
  return json{{"kind", model_kind(m)}, {"config", config_to_json(cfg)}, {"model", body}};
}

Model model_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  const auto& body = j.at("model");
  if (kind == "dt") return body.get<DecisionTreeModel>();
  if (kind == "mlp") return body.get<MlpModel>();
  if (kind == "svm") return body.get<SvmModel>();
  throw std::invalid_argument("unknown model kind '" + kind + "'");
}

void save_model(const std::filesystem::path& path, const Model& m, const TrainingConfig& cfg) {
  write_file_atomically(path, model_to_json(m, cfg).dump(2) + "\n");
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed model " + path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

namespace {

int fold_count_for(const TrainingConfig& cfg, std::size_t n) {
  return cfg.tuning_mode == TuningMode::loocv ? static_cast<int>(n) : cfg.folds;
}

}  // namespace

HiddenUnitsTuning tune_hidden_units(std::span<const LabeledExample> train, const TrainingConfig& cfg,
                                    std::span<const Feature> subset) {
  if (cfg.hidden_units_grid.empty()) throw std::invalid_argument("empty hidden units grid");
  const auto fold = stratified_folds(train, fold_count_for(cfg, train.size()), cfg.rng_seed);
  HiddenUnitsTuning out;
  out.best = cfg.hidden_units_grid.front();
  std::optional<double> best;
  for (int h : cfg.hidden_units_grid) {
    const Confusion c = cross_validate(train, fold, [&](std::span<const LabeledExample> fit) {
      return train_mlp(fit, h, cfg, subset);
    });
    const auto f1 = metrics_from_confusion(c).f1;
    out.scores.push_back({{static_cast<double>(h)}, f1});
    if (f1 && (!best || *f1 > *best || (*f1 == *best && h < out.best))) {
      best = f1;
      out.best = h;
    }
  }
  return out;
}

SvmTuning tune_svm(std::span<const LabeledExample> train, const TrainingConfig& cfg,
                   std::span<const Feature> subset) {
  if (cfg.gamma_grid.empty() || cfg.cost_grid.empty()) throw std::invalid_argument("empty SVM grid");
  const auto fold = stratified_folds(train, fold_count_for(cfg, train.size()), cfg.rng_seed);
  SvmTuning out;
  out.gamma = cfg.gamma_grid.front();
  out.cost = cfg.cost_grid.front();
  std::optional<double> best;
  for (double gamma : cfg.gamma_grid) {
    for (double cost : cfg.cost_grid) {
      std::optional<double> f1;
      try {
        const Confusion c = cross_validate(train, fold, [&](std::span<const LabeledExample> fit) {
          return train_svm(fit, gamma, cost, cfg.svm_degree, cfg, subset);
        });
        f1 = metrics_from_confusion(c).f1;
      } catch (const SvmNotConverged&) {
        // scored as undefined
      }
      out.scores.push_back({{gamma, cost}, f1});
      if (f1 && (!best || *f1 > *best)) {
        best = f1;
        out.gamma = gamma;
        out.cost = cost;
      }
    }
  }
  return out;
}

}  // namespace postforge
