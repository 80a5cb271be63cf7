#pragma once

#include <array>
#include <span>
#include <vector>

#include <json.hpp>

#include "postforge/features.hpp"
#include "postforge/training.hpp"

namespace postforge {

struct Prediction {
  Label label = Label::no;
  double confidence = 0.0;
};

struct TreeNode {
  // Internal nodes: feature is set and x[feature] < threshold goes left.
  // Leaves: feature < 0.
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::array<std::size_t, 2> class_counts{};  // [NO, YES]
  // Impurity decrease of this node's split, normalized by root impurity.
  double gain = 0.0;

  bool is_leaf() const { return feature < 0; }
  Label majority() const { return class_counts[1] >= class_counts[0] ? Label::yes : Label::no; }
  bool operator==(const TreeNode&) const = default;
};

/// CART classification tree over Gini impurity. Node 0 is the root.
class DecisionTreeModel {
 public:
  std::vector<TreeNode> nodes;
  double cp_used = 0.0;
  std::vector<Feature> feature_subset;
  TreeParams params;

  Prediction predict(const FeatureVector& fv) const;
  /// `x` must hold all eleven features in canonical order.
  Prediction predict(std::span<const double> x) const;
  /// Prediction of the subtree obtained by pruning every split whose gain is
  /// below `cp`. Equivalent to training with that cp.
  Prediction predict_at(std::span<const double> x, double cp) const;

  /// Copy with every split of gain < cp collapsed into a leaf.
  DecisionTreeModel pruned(double cp) const;

  std::size_t node_count() const { return nodes.size(); }
  int depth() const;
  /// Total root-normalized impurity decrease attributed to each feature.
  FeatureArray importances() const;

  /// Throws std::logic_error if a structural invariant is violated.
  void check_invariants() const;

  bool operator==(const DecisionTreeModel&) const = default;
};

/// Greedy growth on Gini impurity. A split is kept only if it lowers total
/// impurity, normalized by the root's, by at least `cp`; children must hold
/// at least params.min_leaf examples and depth is capped at params.max_depth.
/// Candidate thresholds are midpoints between consecutive distinct values; on
/// equal gain the lower feature index, then the lower threshold, wins.
DecisionTreeModel train_tree(std::span<const LabeledExample> train, double cp,
                             const TreeParams& params = {},
                             std::span<const Feature> subset = {});

struct CpTuning {
  double best_cp = 0.0;
  // (cp, cross-validated F1) for every grid value; F1 may be undefined.
  std::vector<std::pair<double, std::optional<double>>> scores;
};

/// Picks the grid value with the highest cross-validated F1 (pooled over
/// folds). Ties go to the larger cp. LOOCV or stratified k-fold per config.
CpTuning tune_cp(std::span<const LabeledExample> train, const TrainingConfig& cfg,
                 std::span<const Feature> subset = {});

/// cp values as JSON; infinity is written as the string "inf".
nlohmann::json encode_cp(double cp);
double decode_cp(const nlohmann::json& j);

void to_json(nlohmann::json& j, const DecisionTreeModel& m);
void from_json(const nlohmann::json& j, DecisionTreeModel& m);

}  // namespace postforge
