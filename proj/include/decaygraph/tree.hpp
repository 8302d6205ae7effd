#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "decaygraph/edge_features.hpp"
#include "decaygraph/feature_io.hpp"
#include "decaygraph/infogain.hpp"

namespace decaygraph {

struct TreeConfig {
  std::size_t min_leaf_size = 2;
  std::optional<std::size_t> max_depth;  // root has depth 0
  double min_gain = 0.001;               // bits

  void validate() const;
  friend bool operator==(const TreeConfig&, const TreeConfig&) = default;
};

struct TreeNode {
  // Internal nodes: rows with value <= threshold go left.
  std::optional<std::size_t> feature;  // column index
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  ClassDistribution counts;

  bool is_leaf() const { return !feature.has_value(); }
  int predicted_class() const { return counts.n_persist >= counts.n_decay ? 1 : 0; }
  double persist_probability() const {
    return static_cast<double>(counts.n_persist) / static_cast<double>(counts.total());
  }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Prediction {
  int label;
  double persist_probability;
};

// Axis-parallel binary tree grown greedily on weighted information gain.
// Nodes are stored in preorder; node 0 is the root.
class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(TreeConfig cfg, std::vector<std::string> feature_names, std::vector<TreeNode> nodes);

  const TreeConfig& config() const { return cfg_; }
  const std::vector<std::string>& feature_names() const { return names_; }
  std::span<const TreeNode> nodes() const { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }

  std::size_t leaf_index(std::span<const double> x) const;
  Prediction predict(std::span<const double> x) const;
  Prediction predict(const EdgeFeatureVector& x) const {
    const auto v = x.values();
    return predict(std::span<const double>(v));
  }

  nlohmann::json to_json() const;
  static DecisionTree from_json(const nlohmann::json& j);

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  TreeConfig cfg_;
  std::vector<std::string> names_;
  std::vector<TreeNode> nodes_;
};

// Generic learner over named numeric columns. Deterministic for a given row
// order and config. Each split is the (column, threshold) with the largest
// weighted gain; ties go to the earlier column, then the lower threshold.
// Growth stops when a node is pure, reaches max_depth, cannot give both
// sides min_leaf_size rows, or the best gain falls below min_gain.
DecisionTree train_tree(std::span<const std::span<const double>> columns,
                        std::vector<std::string> names, std::span<const int> labels,
                        const TreeConfig& cfg = {});

// Edge learner over the 15 feature columns.
DecisionTree train_tree(const FeatureMatrix& data, const TreeConfig& cfg = {});

struct PathCondition {
  std::size_t feature;
  bool greater;  // true: value > threshold
  double threshold;
};

struct LeafPath {
  std::vector<PathCondition> conditions;
  ClassDistribution counts;
  int predicted_class;
  double persist_probability;
  std::string text;
};

// Root-to-leaf paths in preorder, at most max_leaves of them (0 = all).
std::vector<LeafPath> describe_tree(const DecisionTree& tree, std::size_t max_leaves = 0);

}  // namespace decaygraph
