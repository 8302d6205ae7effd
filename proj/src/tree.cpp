#include "decaygraph/tree.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "decaygraph/errors.hpp"

namespace decaygraph {

void TreeConfig::validate() const {
  if (min_leaf_size < 1) throw UsageError("tree: min_leaf_size must be >= 1");
  if (min_gain < 0.0) throw UsageError("tree: min_gain must be >= 0");
}

DecisionTree::DecisionTree(TreeConfig cfg, std::vector<std::string> feature_names,
                           std::vector<TreeNode> nodes)
    : cfg_(cfg), names_(std::move(feature_names)), nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw DataError("tree: no nodes");
  const auto n = static_cast<std::int32_t>(nodes_.size());
  for (std::int32_t k = 0; k < n; ++k) {
    const TreeNode& node = nodes_[k];
    if (node.counts.total() <= 0) throw DataError("tree: node without training rows");
    if (node.is_leaf()) continue;
    if (*node.feature >= names_.size()) throw DataError("tree: split on unknown column");
    // preorder: children follow their parent
    if (node.left <= k || node.right <= k || node.left >= n || node.right >= n) {
      throw DataError("tree: malformed child links");
    }
  }
}

std::size_t DecisionTree::leaf_index(std::span<const double> x) const {
  if (x.size() < names_.size()) throw DataError("tree: feature vector too short");
  std::size_t k = 0;
  while (!nodes_[k].is_leaf()) {
    const TreeNode& node = nodes_[k];
    k = static_cast<std::size_t>(x[*node.feature] <= node.threshold ? node.left : node.right);
  }
  return k;
}

Prediction DecisionTree::predict(std::span<const double> x) const {
  const TreeNode& leaf = nodes_[leaf_index(x)];
  return {leaf.predicted_class(), leaf.persist_probability()};
}

nlohmann::json DecisionTree::to_json() const {
  nlohmann::json j;
  j["model"] = "tree";
  j["schema_version"] = 1;
  j["features"] = names_;
  j["config"] = {{"min_leaf_size", cfg_.min_leaf_size},
                 {"max_depth", cfg_.max_depth ? nlohmann::json(*cfg_.max_depth) : nlohmann::json()},
                 {"min_gain", cfg_.min_gain}};
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (const TreeNode& node : nodes_) {
    nlohmann::json n{{"n_persist", node.counts.n_persist}, {"n_decay", node.counts.n_decay}};
    if (node.is_leaf()) {
      n["leaf"] = true;
      n["class"] = node.predicted_class();
      n["p_persist"] = node.persist_probability();
    } else {
      n["feature"] = names_[*node.feature];
      n["threshold"] = node.threshold;
      n["left"] = node.left;
      n["right"] = node.right;
    }
    nodes.push_back(std::move(n));
  }
  return j;
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
  try {
    if (j.at("model").get<std::string>() != "tree") throw DataError("model file is not a tree");
    TreeConfig cfg;
    const auto& c = j.at("config");
    cfg.min_leaf_size = c.at("min_leaf_size").get<std::size_t>();
    if (!c.at("max_depth").is_null()) cfg.max_depth = c.at("max_depth").get<std::size_t>();
    cfg.min_gain = c.at("min_gain").get<double>();
    auto names = j.at("features").get<std::vector<std::string>>();
    std::vector<TreeNode> nodes;
    for (const auto& n : j.at("nodes")) {
      TreeNode node;
      node.counts = {n.at("n_persist").get<std::int64_t>(), n.at("n_decay").get<std::int64_t>()};
      if (!n.value("leaf", false)) {
        const auto fname = n.at("feature").get<std::string>();
        auto it = std::find(names.begin(), names.end(), fname);
        if (it == names.end()) throw DataError("tree: unknown feature " + fname);
        node.feature = static_cast<std::size_t>(it - names.begin());
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<std::int32_t>();
        node.right = n.at("right").get<std::int32_t>();
      }
      nodes.push_back(node);
    }
    return DecisionTree(cfg, std::move(names), std::move(nodes));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("tree model: ") + e.what());
  }
}

namespace {

constexpr double kTieEpsilon = 1e-12;

struct Builder {
  std::span<const std::span<const double>> columns;
  std::span<const int> labels;
  const TreeConfig& cfg;
  std::vector<TreeNode> nodes;
  std::vector<char> goes_left;
  std::vector<double> value_buf;
  std::vector<int> label_buf;

  // `sorted[f]` lists the node's rows ordered by column f.
  std::int32_t grow(std::vector<std::vector<std::uint32_t>> sorted, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(nodes.size());
    nodes.emplace_back();
    ClassDistribution counts;
    for (std::uint32_t r : sorted[0]) counts.add(labels[r]);
    nodes[id].counts = counts;

    const std::size_t n = sorted[0].size();
    const bool pure = counts.n_persist == 0 || counts.n_decay == 0;
    if (pure || (cfg.max_depth && depth >= *cfg.max_depth) || n < 2 * cfg.min_leaf_size) return id;

    std::optional<std::size_t> best_feature;
    SplitCandidate best;
    for (std::size_t f = 0; f < columns.size(); ++f) {
      value_buf.resize(n);
      label_buf.resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        value_buf[k] = columns[f][sorted[f][k]];
        label_buf[k] = labels[sorted[f][k]];
      }
      auto cand = best_sorted_split(value_buf, label_buf, cfg.min_leaf_size);
      if (cand && (!best_feature || cand->gain > best.gain + kTieEpsilon)) {
        best_feature = f;
        best = *cand;
      }
    }
    if (!best_feature || best.gain <= 0.0 || best.gain < cfg.min_gain) return id;

    const auto& split_col = columns[*best_feature];
    for (std::uint32_t r : sorted[0]) goes_left[r] = split_col[r] <= best.threshold ? 1 : 0;
    std::vector<std::vector<std::uint32_t>> left(columns.size()), right(columns.size());
    for (std::size_t f = 0; f < columns.size(); ++f) {
      left[f].reserve(static_cast<std::size_t>(best.left.total()));
      right[f].reserve(static_cast<std::size_t>(best.right.total()));
      for (std::uint32_t r : sorted[f]) (goes_left[r] ? left[f] : right[f]).push_back(r);
    }
    sorted.clear();
    sorted.shrink_to_fit();

    nodes[id].feature = *best_feature;
    nodes[id].threshold = best.threshold;
    const std::int32_t l = grow(std::move(left), depth + 1);
    nodes[id].left = l;
    const std::int32_t r = grow(std::move(right), depth + 1);
    nodes[id].right = r;
    return id;
  }
};

}  // namespace

DecisionTree train_tree(std::span<const std::span<const double>> columns,
                        std::vector<std::string> names, std::span<const int> labels,
                        const TreeConfig& cfg) {
  cfg.validate();
  if (columns.empty() || names.size() != columns.size()) {
    throw UsageError("tree: column/name mismatch");
  }
  const std::size_t n = labels.size();
  if (n == 0) throw DataError("tree: empty training set");
  for (const auto& c : columns) {
    if (c.size() != n) throw DataError("tree: column length mismatch");
  }
  std::vector<std::vector<std::uint32_t>> sorted(columns.size());
  for (std::size_t f = 0; f < columns.size(); ++f) {
    auto& idx = sorted[f];
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), 0u);
    const auto col = columns[f];
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
  }
  Builder b{columns, labels, cfg, {}, std::vector<char>(n, 0), {}, {}};
  b.grow(std::move(sorted), 0);
  return DecisionTree(cfg, std::move(names), std::move(b.nodes));
}

DecisionTree train_tree(const FeatureMatrix& data, const TreeConfig& cfg) {
  std::vector<std::span<const double>> cols;
  std::vector<std::string> names;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    cols.push_back(data.column(f));
    names.emplace_back(kFeatureNames[f]);
  }
  return train_tree(cols, std::move(names), data.labels(), cfg);
}

namespace {

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void walk(const DecisionTree& tree, std::size_t k, std::vector<PathCondition>& path,
          std::vector<LeafPath>& out, std::size_t max_leaves) {
  if (max_leaves != 0 && out.size() >= max_leaves) return;
  const TreeNode& node = tree.nodes()[k];
  if (node.is_leaf()) {
    LeafPath leaf{path, node.counts, node.predicted_class(), node.persist_probability(), {}};
    std::string text;
    for (std::size_t c = 0; c < path.size(); ++c) {
      if (c > 0) text += " AND ";
      text += tree.feature_names()[path[c].feature];
      text += path[c].greater ? " > " : " <= ";
      text += fmt_num(path[c].threshold);
    }
    if (text.empty()) text = "(all)";
    text += " -> ";
    text += leaf.predicted_class ? "persist" : "decay";
    text += " (p=" + fmt_num(leaf.persist_probability) +
            ", n=" + std::to_string(node.counts.total()) + ")";
    leaf.text = std::move(text);
    out.push_back(std::move(leaf));
    return;
  }
  path.push_back({*node.feature, false, node.threshold});
  walk(tree, static_cast<std::size_t>(node.left), path, out, max_leaves);
  path.back().greater = true;
  walk(tree, static_cast<std::size_t>(node.right), path, out, max_leaves);
  path.pop_back();
}

}  // namespace

std::vector<LeafPath> describe_tree(const DecisionTree& tree, std::size_t max_leaves) {
  std::vector<LeafPath> out;
  std::vector<PathCondition> path;
  walk(tree, 0, path, out, max_leaves);
  return out;
}

}  // namespace decaygraph
