#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "decaygraph/errors.hpp"
#include "decaygraph/tree.hpp"
#include "support.hpp"

using namespace decaygraph;
using decaygraph::fixtures::toy_class;
using decaygraph::fixtures::toy_grid;

namespace {

double h2(const ClassDistribution& d) {
  if (d.total() == 0) return 0;
  const double p = static_cast<double>(d.n_persist) / static_cast<double>(d.total());
  if (p == 0 || p == 1) return 0;
  return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

DecisionTree train_toy(const fixtures::ToyData& d, const TreeConfig& cfg) {
  const std::vector<std::span<const double>> cols{d.x, d.y};
  return train_tree(cols, {"x", "y"}, d.label, cfg);
}

std::vector<LabeledEdge> random_edges(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<LabeledEdge> edges(n);
  for (auto& e : edges) {
    e.features.c_ij = 1 + static_cast<std::int64_t>(rng() % 12);
    e.features.d_i = 1 + static_cast<std::int64_t>(rng() % 20);
    e.features.edate = u(rng);
    e.features.fdate = e.features.edate * u(rng);
    e.features.p_ij = u(rng);
    const double z = 0.6 * e.features.c_ij - 0.2 * e.features.d_i + 2 * e.features.edate - 1.5;
    e.label = u(rng) < 1 / (1 + std::exp(-z));
  }
  return edges;
}

}  // namespace

TEST(Tree, ToyGeometry) {
  TreeConfig cfg;
  cfg.min_leaf_size = 1;
  const auto tree = train_toy(toy_grid(), cfg);
  ASSERT_FALSE(tree.root().is_leaf());
  EXPECT_EQ(*tree.root().feature, 0u);
  EXPECT_DOUBLE_EQ(tree.root().threshold, 5.0);
  const auto& right = tree.nodes()[tree.root().right];
  ASSERT_FALSE(right.is_leaf());
  EXPECT_EQ(*right.feature, 1u);
  EXPECT_DOUBLE_EQ(right.threshold, 10.0);
  EXPECT_EQ(tree.nodes().size(), 5u);

  const std::vector<double> square{6, 11}, circle{6, 9};
  EXPECT_EQ(tree.predict(std::span<const double>(square)).label, 1);
  EXPECT_EQ(tree.predict(std::span<const double>(circle)).label, 0);
}

TEST(Tree, SingleClassGivesOneLeaf) {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<int> y{1, 1, 1, 1};
  const std::vector<std::span<const double>> cols{x};
  const auto tree = train_tree(cols, {"x"}, y);
  ASSERT_EQ(tree.nodes().size(), 1u);
  EXPECT_EQ(tree.predict(std::span<const double>(x)).persist_probability, 1.0);
}

TEST(Tree, EmptyTrainingSetIsAnError) {
  const std::vector<double> x;
  const std::vector<int> y;
  const std::vector<std::span<const double>> cols{x};
  EXPECT_THROW(train_tree(cols, {"x"}, y), DataError);
}

TEST(Tree, RootMatchesExhaustiveSearchOnTwelvePoints) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::vector<double>> cols(3, std::vector<double>(12));
    std::vector<int> y(12);
    for (int i = 0; i < 12; ++i) {
      for (auto& c : cols) c[i] = static_cast<double>(rng() % 7);
      y[i] = rng() % 2;
    }
    if (std::count(y.begin(), y.end(), 1) % 12 == 0) continue;

    ClassDistribution all;
    for (int v : y) all.add(v);
    double best = -1, best_t = 0;
    std::size_t best_f = 0;
    for (std::size_t f = 0; f < cols.size(); ++f) {
      std::vector<double> vals(cols[f]);
      std::sort(vals.begin(), vals.end());
      vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
      for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
        const double t = (vals[k] + vals[k + 1]) / 2;
        ClassDistribution l, r;
        for (int i = 0; i < 12; ++i) (cols[f][i] <= t ? l : r).add(y[i]);
        if (l.total() < 1 || r.total() < 1) continue;
        const double g = h2(all) - (l.total() * h2(l) + r.total() * h2(r)) / 12.0;
        if (g > best + 1e-12) best = g, best_f = f, best_t = t;
      }
    }
    TreeConfig cfg;
    cfg.min_leaf_size = 1;
    cfg.min_gain = 0;
    const std::vector<std::span<const double>> spans{cols[0], cols[1], cols[2]};
    const auto tree = train_tree(spans, {"a", "b", "c"}, y, cfg);
    if (best <= 0) {
      EXPECT_TRUE(tree.root().is_leaf());
      continue;
    }
    ASSERT_FALSE(tree.root().is_leaf());
    EXPECT_EQ(*tree.root().feature, best_f);
    EXPECT_DOUBLE_EQ(tree.root().threshold, best_t);
  }
}

TEST(Tree, LeavesRespectMinimumSizeAndPartitionTrainingData) {
  const auto edges = random_edges(9, 800);
  const FeatureMatrix m(edges);
  TreeConfig cfg;
  cfg.min_leaf_size = 10;
  const auto tree = train_tree(m, cfg);
  std::vector<ClassDistribution> reached(tree.nodes().size());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    reached[tree.leaf_index(row)].add(m.labels()[r]);
  }
  std::size_t correct = 0, persist = 0;
  for (std::size_t k = 0; k < tree.nodes().size(); ++k) {
    const auto& node = tree.nodes()[k];
    if (!node.is_leaf()) {
      EXPECT_EQ(reached[k].total(), 0);
      continue;
    }
    EXPECT_EQ(reached[k], node.counts);
    EXPECT_GE(node.counts.total(), 10);
    correct += node.predicted_class() ? node.counts.n_persist : node.counts.n_decay;
    persist += node.counts.n_persist;
  }
  EXPECT_GE(correct, std::max(persist, m.rows() - persist));
}

TEST(Tree, MaxDepthBoundsTheTree) {
  TreeConfig cfg;
  cfg.max_depth = 2;
  const auto tree = train_tree(FeatureMatrix(random_edges(10, 600)), cfg);
  EXPECT_LE(tree.nodes().size(), 7u);
  const auto paths = describe_tree(tree);
  for (const auto& p : paths) EXPECT_LE(p.conditions.size(), 2u);
}

TEST(Tree, RootAgreesWithFeatureRanking) {
  const auto edges = random_edges(11, 1500);
  const FeatureMatrix m(edges);
  const auto tree = train_tree(m);
  const auto ranking = rank_features(m);
  ASSERT_FALSE(tree.root().is_leaf());
  EXPECT_EQ(*tree.root().feature, static_cast<std::size_t>(ranking.entries.front().feature));
  EXPECT_DOUBLE_EQ(tree.root().threshold, ranking.entries.front().partition.thresholds.at(0));
}

TEST(Tree, MonotoneTransformKeepsPredictions) {
  auto edges = random_edges(12, 700);
  const auto before = train_tree(FeatureMatrix(edges));
  std::vector<int> a;
  for (const auto& e : edges) a.push_back(before.predict(e.features).label);
  for (auto& e : edges) e.features.edate = std::exp(3 * e.features.edate) - 1;
  const auto after = train_tree(FeatureMatrix(edges));
  std::vector<int> b;
  for (const auto& e : edges) b.push_back(after.predict(e.features).label);
  EXPECT_EQ(a, b);
  EXPECT_EQ(before.nodes().size(), after.nodes().size());
}

TEST(Tree, JsonRoundTrip) {
  const auto tree = train_tree(FeatureMatrix(random_edges(13, 500)));
  const auto text = tree.to_json().dump();
  EXPECT_EQ(DecisionTree::from_json(nlohmann::json::parse(text)), tree);
  EXPECT_EQ(tree.to_json()["model"], "tree");
}

TEST(Tree, RejectsBrokenJson) {
  auto j = train_tree(FeatureMatrix(random_edges(14, 300))).to_json();
  j["nodes"][0]["left"] = 999;
  EXPECT_THROW(DecisionTree::from_json(j), DataError);
}

TEST(Tree, DescribeRendersEveryLeaf) {
  TreeConfig cfg;
  cfg.max_depth = 2;
  const auto tree = train_tree(FeatureMatrix(random_edges(15, 900)), cfg);
  const auto paths = describe_tree(tree);
  std::size_t leaves = 0;
  for (const auto& n : tree.nodes()) leaves += n.is_leaf();
  EXPECT_EQ(paths.size(), leaves);
  for (const auto& p : paths) {
    EXPECT_NE(p.text.find("(p="), std::string::npos) << p.text;
    EXPECT_NE(p.text.find(p.predicted_class ? "persist" : "decay"), std::string::npos);
  }
  EXPECT_EQ(describe_tree(tree, 1).size(), 1u);
}

TEST(Tree, DeterministicForSameInput) {
  const FeatureMatrix m(random_edges(16, 500));
  EXPECT_EQ(train_tree(m), train_tree(m));
}

TEST(Tree, ToyRegionsOnDenseGrid) {
  TreeConfig cfg;
  cfg.min_leaf_size = 1;
  const auto tree = train_toy(toy_grid(), cfg);
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < 100; ++j) {
      const std::vector<double> p{(i + 0.5) * 0.1, (j + 0.5) * 0.2};
      ASSERT_EQ(tree.predict(std::span<const double>(p)).label, toy_class(p[0], p[1]));
    }
  }
}
