#include <algorithm>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "decaygraph/errors.hpp"
#include "decaygraph/feature_io.hpp"
#include "support.hpp"

using namespace decaygraph;
using decaygraph::fixtures::BruteForceFeatures;
using decaygraph::fixtures::call;
using decaygraph::fixtures::random_calls;
using decaygraph::fixtures::vid;

namespace {

EdgeFeatureVector features_of(const WindowGraph& g, const std::string& i, const std::string& j,
                              InjnMode mode = InjnMode::arcs) {
  return edge_features(g, *g.index_of(i), *g.index_of(j), mode);
}

}  // namespace

TEST(VertexFeatures, NilValuesForSilentTarget) {
  const std::vector<CallRecord> recs{call("i", "B", 1), call("i", "B", 2), call("i", "B", 3), call("i", "C", 4)};
  const auto g = build_window_graph(recs, {0, 10});
  const auto f = features_of(g, "i", "B");
  EXPECT_EQ(f.d_i, 2);
  EXPECT_EQ(f.c_i, 4);
  EXPECT_EQ(f.d_j, 0);
  EXPECT_EQ(f.c_j, 0);
  EXPECT_EQ(f.c_ji, 0);
  EXPECT_EQ(f.p_ji, 0.0);
  EXPECT_EQ(f.p_ij, 0.75);
}

TEST(DyadFeatures, ProportionIsExactRatio) {
  std::vector<CallRecord> recs{call("i", "j", 1), call("i", "j", 2)};
  for (int k = 0; k < 8; ++k) recs.push_back(call("i", vid(k), 3));
  const auto g = build_window_graph(recs, {0, 10});
  EXPECT_EQ(features_of(g, "i", "j").p_ij, 0.2);
}

TEST(NeighborhoodFeatures, Triangle) {
  std::vector<CallRecord> recs;
  for (auto [a, b] : {std::pair{"A", "B"}, {"B", "A"}, {"A", "C"}, {"C", "A"}, {"B", "C"}, {"C", "B"}}) {
    recs.push_back(call(a, b, 1));
  }
  const auto g = build_window_graph(recs, {0, 10});
  const auto f = features_of(g, "A", "B");
  EXPECT_EQ(f.cn, 1);
  EXPECT_EQ(f.in_, 1);
  EXPECT_EQ(f.jn, 1);
  EXPECT_EQ(f.injn, 0);
  EXPECT_EQ(f.jnin, 0);
}

TEST(NeighborhoodFeatures, BridgeBetweenStarsHasNoCommonNeighbors) {
  std::vector<CallRecord> recs{call("h1", "h2", 1)};
  for (int k = 0; k < 5; ++k) {
    recs.push_back(call("h1", vid(k), 2));
    recs.push_back(call(vid(10 + k), "h2", 2));
  }
  recs.push_back(call(vid(0), vid(10), 3));
  const auto g = build_window_graph(recs, {0, 10});
  const auto f = features_of(g, "h1", "h2");
  EXPECT_EQ(f.cn, 0);
  EXPECT_EQ(f.in_, 0);
  EXPECT_EQ(f.injn, 1);
  EXPECT_EQ(f.jnin, 0);
}

TEST(NeighborhoodFeatures, CallsModeCountsCalls) {
  std::vector<CallRecord> recs{call("i", "j", 1), call("i", "a", 1), call("b", "j", 1)};
  for (int k = 0; k < 3; ++k) recs.push_back(call("a", "b", 2 + k));
  const auto g = build_window_graph(recs, {0, 10});
  EXPECT_EQ(features_of(g, "i", "j", InjnMode::arcs).injn, 1);
  EXPECT_EQ(features_of(g, "i", "j", InjnMode::calls).injn, 3);
}

TEST(TemporalFeatures, Endpoints) {
  const std::vector<CallRecord> recs{call("A", "B", 0), call("A", "B", 40), call("C", "D", 50)};
  const auto g = build_window_graph(recs, {0, 100});
  const auto ab = features_of(g, "A", "B");
  EXPECT_EQ(ab.fdate, 0.0);
  EXPECT_EQ(ab.edate, 0.4);
  const auto cd = features_of(g, "C", "D");
  EXPECT_EQ(cd.fdate, 0.5);
  EXPECT_EQ(cd.edate, 0.5);
}

TEST(EdgeFeatures, MissingArcIsAnError) {
  const std::vector<CallRecord> recs{call("A", "B", 1)};
  const auto g = build_window_graph(recs, {0, 10});
  EXPECT_THROW(edge_features(g, *g.index_of("B"), *g.index_of("A")), DataError);
}

TEST(EdgeFeatures, RandomGraphsMatchBruteForce) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const auto recs = random_calls(rng, 30, 250, 0, 1000);
    const auto g = build_window_graph(recs, {0, 1000});
    const BruteForceFeatures oracle(recs, 0, 1000);
    for (const auto mode : {InjnMode::arcs, InjnMode::calls}) {
      for (const auto& [i, j] : oracle.arcs()) {
        ASSERT_EQ(features_of(g, i, j, mode), oracle.features(i, j, mode)) << i << "->" << j;
      }
    }
  }
}

TEST(EdgeFeatures, InvariantsHoldOnEveryEdge) {
  std::mt19937_64 rng(77);
  const auto recs = random_calls(rng, 40, 600, 0, 500);
  const auto g = build_window_graph(recs, {0, 500});
  std::map<VertexIndex, double> share;
  for (const auto& a : g.arcs()) {
    const auto f = edge_features(g, a.source, a.target);
    share[a.source] += f.p_ij;
    EXPECT_GE(f.d_i, 1);
    EXPECT_GE(f.c_i, f.c_ij);
    EXPECT_GE(f.c_ij, 1);
    EXPECT_GE(f.c_j, f.c_ji);
    EXPECT_LE(0.0, f.fdate);
    EXPECT_LE(f.fdate, f.edate);
    EXPECT_LE(f.edate, 1.0);
    const auto ni = static_cast<std::int64_t>(g.contacts(a.source).size()) - 1;
    const auto nj = static_cast<std::int64_t>(g.contacts(a.target).size()) - 1;
    EXPECT_LE(f.cn, std::min(ni, nj));
    EXPECT_LE(f.in_, ni);
    EXPECT_LE(f.jn, nj);
  }
  for (const auto& [v, s] : share) EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(LabelEdges, DirectedAndEitherCriteria) {
  const std::vector<CallRecord> recs{call("A", "B", 1), call("C", "D", 2), call("E", "F", 3),
                                     call("A", "B", 15), call("D", "C", 16)};
  const auto p = split_windows(recs, {0, 10, 10});
  const auto directed = label_edges(p.tau1, p.tau2);
  ASSERT_EQ(directed.size(), 3u);
  std::map<std::string, int> lab;
  for (const auto& e : directed) lab[e.source + e.target] = e.label;
  EXPECT_EQ(lab["AB"], 1);
  EXPECT_EQ(lab["CD"], 0);
  EXPECT_EQ(lab["EF"], 0);

  FeatureOptions either;
  either.persist_mode = PersistMode::either;
  for (const auto& e : label_edges(p.tau1, p.tau2, either)) {
    EXPECT_EQ(e.label, e.source == "E" ? 0 : 1);
  }
}

TEST(LabelEdges, LabelsMatchSecondWindowMembership) {
  std::mt19937_64 rng(31);
  const auto recs = random_calls(rng, 30, 800, 0, 200);
  const auto p = split_windows(recs, {0, 100, 100});
  const auto edges = label_edges(p.tau1, p.tau2);
  ASSERT_EQ(edges.size(), p.tau1.arc_count());
  for (const auto& e : edges) {
    const bool present = p.tau2.find(e.source, e.target) != nullptr;
    EXPECT_EQ(e.label, present ? 1 : 0);
  }
}

TEST(LabelEdges, ThreadCountDoesNotChangeOutput) {
  std::mt19937_64 rng(41);
  const auto recs = random_calls(rng, 50, 2000, 0, 200);
  const auto p = split_windows(recs, {0, 100, 100});
  FeatureOptions many;
  many.threads = 4;
  EXPECT_EQ(label_edges(p.tau1, p.tau2), label_edges(p.tau1, p.tau2, many));
}

TEST(LabelEdges, InsertionOrderDoesNotMatter) {
  std::mt19937_64 rng(43);
  auto recs = random_calls(rng, 30, 500, 0, 200);
  const auto a = split_windows(recs, {0, 100, 100});
  std::reverse(recs.begin(), recs.end());
  const auto b = split_windows(recs, {0, 100, 100});
  EXPECT_EQ(label_edges(a.tau1, a.tau2), label_edges(b.tau1, b.tau2));
}

TEST(FeatureFile, RoundTripsExactly) {
  std::mt19937_64 rng(47);
  const auto recs = random_calls(rng, 30, 500, 0, 777);
  const auto p = split_windows(recs, {0, 333, 444});
  const auto edges = label_edges(p.tau1, p.tau2);
  std::stringstream buf;
  write_features(buf, edges);
  std::string header;
  std::getline(buf, header);
  EXPECT_EQ(header, "source,target,d_i,d_j,c_i,c_j,c_ij,c_ji,p_ij,p_ji,cn,in,jn,injn,jnin,fdate,edate,class");
  buf.seekg(0);
  EXPECT_EQ(read_features(buf), edges);
}
