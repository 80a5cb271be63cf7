#include "postforge/tree.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "postforge/metrics.hpp"

namespace postforge {

using nlohmann::json;

namespace {

// n * gini for a node holding (c0, c1).
double weighted_gini(double c0, double c1) {
  const double n = c0 + c1;
  if (n == 0.0) return 0.0;
  return n - (c0 * c0 + c1 * c1) / n;
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double decrease = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(std::span<const LabeledExample> train, std::span<const Feature> subset,
              const TreeParams& params, double cp, DecisionTreeModel& model)
      : subset_(subset.begin(), subset.end()), params_(params), cp_(cp), model_(model) {
    rows_.reserve(train.size());
    labels_.reserve(train.size());
    for (const auto& e : train) {
      rows_.push_back(e.features.to_array());
      labels_.push_back(e.label == Label::yes ? 1 : 0);
    }
  }

  void build() {
    std::vector<std::size_t> all(rows_.size());
    std::iota(all.begin(), all.end(), 0);
    const auto counts = count(all);
    root_weighted_ = weighted_gini(static_cast<double>(counts[0]), static_cast<double>(counts[1]));
    grow(all, 0);
  }

 private:
  std::array<std::size_t, 2> count(const std::vector<std::size_t>& idx) const {
    std::array<std::size_t, 2> c{};
    for (std::size_t i : idx) ++c[labels_[i]];
    return c;
  }

  SplitChoice best_split(const std::vector<std::size_t>& idx, const std::array<std::size_t, 2>& counts) const {
    SplitChoice best;
    const double node_weighted = weighted_gini(static_cast<double>(counts[0]), static_cast<double>(counts[1]));
    const std::size_t n = idx.size();
    std::vector<std::size_t> order(idx);
    for (Feature feature : subset_) {
      const std::size_t f = index_of(feature);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return rows_[a][f] != rows_[b][f] ? rows_[a][f] < rows_[b][f] : a < b;
      });
      double left[2] = {0.0, 0.0};
      for (std::size_t k = 1; k < n; ++k) {
        left[labels_[order[k - 1]]] += 1.0;
        const double lo = rows_[order[k - 1]][f];
        const double hi = rows_[order[k]][f];
        if (lo == hi) continue;
        if (k < params_.min_leaf || n - k < params_.min_leaf) continue;
        const double right0 = static_cast<double>(counts[0]) - left[0];
        const double right1 = static_cast<double>(counts[1]) - left[1];
        const double decrease = node_weighted - weighted_gini(left[0], left[1]) - weighted_gini(right0, right1);
        if (decrease > best.decrease) {
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid > lo)) mid = hi;
          best = {static_cast<int>(f), mid, decrease};
        }
      }
    }
    return best;
  }

  int grow(const std::vector<std::size_t>& idx, int depth) {
    const int id = static_cast<int>(model_.nodes.size());
    model_.nodes.emplace_back();
    const auto counts = count(idx);
    model_.nodes[id].class_counts = counts;

    const bool pure = counts[0] == 0 || counts[1] == 0;
    if (pure || depth >= params_.max_depth || idx.size() < 2 * params_.min_leaf || root_weighted_ <= 0.0) {
      return id;
    }
    const SplitChoice split = best_split(idx, counts);
    if (split.feature < 0) return id;
    const double gain = split.decrease / root_weighted_;
    if (!(gain > 0.0) || !(gain >= cp_)) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t i : idx) {
      (rows_[i][static_cast<std::size_t>(split.feature)] < split.threshold ? left : right).push_back(i);
    }
    model_.nodes[id].feature = split.feature;
    model_.nodes[id].threshold = split.threshold;
    model_.nodes[id].gain = gain;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    model_.nodes[id].left = l;
    model_.nodes[id].right = r;
    return id;
  }

  std::vector<FeatureArray> rows_;
  std::vector<int> labels_;
  std::vector<Feature> subset_;
  TreeParams params_;
  double cp_;
  double root_weighted_ = 0.0;
  DecisionTreeModel& model_;
};

Prediction leaf_prediction(const TreeNode& node) {
  const std::size_t total = node.class_counts[0] + node.class_counts[1];
  const Label label = node.majority();
  const double share = total == 0 ? 0.0
                                  : static_cast<double>(node.class_counts[label == Label::yes ? 1 : 0]) /
                                        static_cast<double>(total);
  return {label, share};
}

std::vector<Feature> resolve_subset(std::span<const Feature> subset) {
  std::vector<Feature> out = subset.empty() ? all_features() : std::vector<Feature>(subset.begin(), subset.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

DecisionTreeModel train_tree(std::span<const LabeledExample> train, double cp, const TreeParams& params,
                             std::span<const Feature> subset) {
  if (train.empty()) throw std::invalid_argument("train_tree needs a non-empty training set");
  DecisionTreeModel model;
  model.cp_used = cp;
  model.params = params;
  model.feature_subset = resolve_subset(subset);
  TreeBuilder(train, model.feature_subset, params, cp, model).build();
  return model;
}

Prediction DecisionTreeModel::predict(const FeatureVector& fv) const {
  const FeatureArray x = fv.to_array();
  return predict(x);
}

Prediction DecisionTreeModel::predict(std::span<const double> x) const {
  return predict_at(x, -std::numeric_limits<double>::infinity());
}

Prediction DecisionTreeModel::predict_at(std::span<const double> x, double cp) const {
  if (x.size() != kFeatureCount) throw std::invalid_argument("feature vector must have 11 entries");
  if (nodes.empty()) throw std::logic_error("empty tree");
  std::size_t at = 0;
  while (!nodes[at].is_leaf() && nodes[at].gain >= cp) {
    const TreeNode& n = nodes[at];
    at = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right);
  }
  return leaf_prediction(nodes[at]);
}

DecisionTreeModel DecisionTreeModel::pruned(double cp) const {
  DecisionTreeModel out;
  out.cp_used = std::max(cp, cp_used);
  out.feature_subset = feature_subset;
  out.params = params;
  // Preorder copy so child indices stay greater than their parent's.
  auto copy = [&](auto&& self, int from) -> int {
    const int id = static_cast<int>(out.nodes.size());
    out.nodes.push_back(nodes[static_cast<std::size_t>(from)]);
    TreeNode& n = out.nodes.back();
    if (n.is_leaf()) return id;
    if (n.gain < cp) {
      n.feature = -1;
      n.threshold = 0.0;
      n.left = n.right = -1;
      n.gain = 0.0;
      return id;
    }
    const int left_src = n.left;
    const int right_src = n.right;
    const int l = self(self, left_src);
    const int r = self(self, right_src);
    out.nodes[static_cast<std::size_t>(id)].left = l;
    out.nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  };
  if (!nodes.empty()) copy(copy, 0);
  return out;
}

int DecisionTreeModel::depth() const {
  if (nodes.empty()) return 0;
  auto walk = [&](auto&& self, int at) -> int {
    const TreeNode& n = nodes[static_cast<std::size_t>(at)];
    if (n.is_leaf()) return 0;
    return 1 + std::max(self(self, n.left), self(self, n.right));
  };
  return walk(walk, 0);
}

FeatureArray DecisionTreeModel::importances() const {
  FeatureArray out{};
  for (const auto& n : nodes) {
    if (!n.is_leaf()) out[static_cast<std::size_t>(n.feature)] += n.gain;
  }
  return out;
}

void DecisionTreeModel::check_invariants() const {
  if (nodes.empty()) throw std::logic_error("tree has no nodes");
  std::vector<int> parents(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TreeNode& n = nodes[i];
    if (n.is_leaf()) {
      if (n.class_counts[0] + n.class_counts[1] == 0) throw std::logic_error("empty leaf");
      continue;
    }
    if (n.feature >= static_cast<int>(kFeatureCount)) throw std::logic_error("bad split feature");
    if (std::find(feature_subset.begin(), feature_subset.end(), static_cast<Feature>(n.feature)) ==
        feature_subset.end()) {
      throw std::logic_error("split on a feature outside the subset");
    }
    for (int child : {n.left, n.right}) {
      if (child <= static_cast<int>(i) || child >= static_cast<int>(nodes.size())) {
        throw std::logic_error("child index out of order");
      }
      ++parents[static_cast<std::size_t>(child)];
    }
  }
  if (parents[0] != 0) throw std::logic_error("root has a parent");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (parents[i] != 1) throw std::logic_error("node without exactly one parent");
  }
}

CpTuning tune_cp(std::span<const LabeledExample> train, const TrainingConfig& cfg,
                 std::span<const Feature> subset) {
  if (cfg.cp_grid.empty()) throw std::invalid_argument("empty cp grid");
  if (!std::is_sorted(cfg.cp_grid.begin(), cfg.cp_grid.end(), std::greater<>())) {
    throw std::invalid_argument("cp_grid must be descending");
  }
  CpTuning result;
  if (cfg.cp_grid.size() == 1) {
    result.best_cp = cfg.cp_grid.front();
    result.scores.emplace_back(result.best_cp, std::nullopt);
    return result;
  }
  const int k = cfg.tuning_mode == TuningMode::loocv ? static_cast<int>(train.size()) : cfg.folds;
  const std::vector<int> fold = stratified_folds(train, k, cfg.rng_seed);
  const int fold_count = *std::max_element(fold.begin(), fold.end()) + 1;
  const double grow_cp = cfg.cp_grid.back();

  auto run_fold = [&](int f) {
    Dataset fit;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (fold[i] == f) held.push_back(i);
      else fit.push_back(train[i]);
    }
    std::vector<Confusion> per_cp(cfg.cp_grid.size());
    if (held.empty() || fit.empty()) return per_cp;
    const DecisionTreeModel tree = train_tree(fit, grow_cp, cfg.tree, subset);
    for (std::size_t i : held) {
      const FeatureArray x = train[i].features.to_array();
      for (std::size_t c = 0; c < cfg.cp_grid.size(); ++c) {
        per_cp[c].add(tree.predict_at(x, cfg.cp_grid[c]).label, train[i].label);
      }
    }
    return per_cp;
  };

  // Folds run concurrently; results are reduced in fold order.
  const auto fold_results = map_folds(fold_count, run_fold);
  std::vector<Confusion> totals(cfg.cp_grid.size());
  for (const auto& per_cp : fold_results) {
    for (std::size_t c = 0; c < per_cp.size(); ++c) totals[c] += per_cp[c];
  }
  std::optional<double> best_score;
  result.best_cp = cfg.cp_grid.front();
  for (std::size_t c = 0; c < cfg.cp_grid.size(); ++c) {
    const auto f1 = metrics_from_confusion(totals[c]).f1;
    result.scores.emplace_back(cfg.cp_grid[c], f1);
    // Strictly greater: on ties the earlier (larger) cp stays.
    if (f1 && (!best_score || *f1 > *best_score)) {
      best_score = f1;
      result.best_cp = cfg.cp_grid[c];
    }
  }
  return result;
}

json encode_cp(double cp) {
  if (std::isinf(cp)) return cp > 0 ? json("inf") : json("-inf");
  return json(cp);
}

double decode_cp(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw std::invalid_argument("bad cp value " + s);
  }
  return j.get<double>();
}

void to_json(json& j, const DecisionTreeModel& m) {
  json nodes = json::array();
  for (const auto& n : m.nodes) {
    json node = {{"counts", {n.class_counts[0], n.class_counts[1]}}};
    if (!n.is_leaf()) {
      node["feature"] = feature_name(static_cast<Feature>(n.feature));
      node["threshold"] = n.threshold;
      node["left"] = n.left;
      node["right"] = n.right;
      node["gain"] = n.gain;
    }
    nodes.push_back(std::move(node));
  }
  json subset = json::array();
  for (Feature f : m.feature_subset) subset.push_back(feature_name(f));
  j = json{{"cp_used", encode_cp(m.cp_used)},
           {"feature_subset", subset},
           {"params", {{"min_leaf", m.params.min_leaf}, {"max_depth", m.params.max_depth}}},
           {"nodes", nodes}};
}

void from_json(const json& j, DecisionTreeModel& m) {
  m = DecisionTreeModel{};
  m.cp_used = decode_cp(j.at("cp_used"));
  for (const auto& name : j.at("feature_subset")) m.feature_subset.push_back(feature_from_name(name.get<std::string>()));
  if (auto p = j.find("params"); p != j.end()) {
    m.params.min_leaf = p->value("min_leaf", std::size_t{5});
    m.params.max_depth = p->value("max_depth", 20);
  }
  for (const auto& node : j.at("nodes")) {
    TreeNode n;
    n.class_counts = {node.at("counts").at(0).get<std::size_t>(), node.at("counts").at(1).get<std::size_t>()};
    if (node.contains("feature")) {
      n.feature = static_cast<int>(index_of(feature_from_name(node.at("feature").get<std::string>())));
      n.threshold = node.at("threshold").get<double>();
      n.left = node.at("left").get<int>();
      n.right = node.at("right").get<int>();
      n.gain = node.value("gain", 0.0);
    }
    m.nodes.push_back(n);
  }
  m.check_invariants();
}

}  // namespace postforge
