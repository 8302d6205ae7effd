#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "decaygraph/errors.hpp"
#include "decaygraph/feature_stats.hpp"
#include "decaygraph/synth.hpp"

using namespace decaygraph;
namespace fs = std::filesystem;

namespace {

SynthConfig small(std::uint64_t seed = 3) {
  auto cfg = synth_preset("paperlike", seed);
  cfg.n_vertices = 2000;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Synth, SameConfigSameCorpus) {
  const auto a = generate(small());
  const auto b = generate(small());
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.intercept, b.intercept);
  const auto c = generate(small(4));
  EXPECT_NE(a.records, c.records);
}

TEST(Synth, WrittenFilesAreByteIdentical) {
  const auto base = fs::temp_directory_path() / "decaygraph_synth_det";
  fs::remove_all(base);
  write_corpus(generate(small()), (base / "a").string());
  write_corpus(generate(small()), (base / "b").string());
  for (const char* f : {"records.csv", "truth.json", "truth_edges.csv"}) {
    EXPECT_EQ(slurp(base / "a" / f), slurp(base / "b" / f)) << f;
  }
  fs::remove_all(base);
}

TEST(Synth, RecordsAreValidIngestInput) {
  const auto corpus = generate(small());
  std::stringstream buf;
  write_records(buf, corpus.records);
  const auto w = corpus.config.windows();
  IngestConfig ic;
  ic.horizon_start = w.t0;
  ic.horizon_end = w.t0 + w.delta1 + w.delta2;
  ic.strict = true;
  ic.has_header = true;
  const auto res = parse_records(buf, ic);
  EXPECT_EQ(res.records, corpus.records);
}

TEST(Synth, TruthLabelsMatchExtractedLabels) {
  const auto corpus = generate(small());
  const auto pair = split_windows(corpus.records, corpus.config.windows());
  EXPECT_TRUE(pair.removed.empty());
  const auto edges = label_edges(pair.tau1, pair.tau2);
  ASSERT_EQ(edges.size(), corpus.truth.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    ASSERT_EQ(edges[k].source, corpus.truth[k].source);
    ASSERT_EQ(edges[k].target, corpus.truth[k].target);
    ASSERT_EQ(edges[k].label, corpus.truth[k].label);
  }
}

TEST(Synth, PlantedProbabilitiesComeFromTheRule) {
  const auto corpus = generate(small());
  const auto pair = split_windows(corpus.records, corpus.config.windows());
  const auto edges = label_edges(pair.tau1, pair.tau2);
  PlantedRule rule = corpus.config.rule;
  rule.intercept = corpus.intercept;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    ASSERT_NEAR(rule.probability(edges[k].features), corpus.truth[k].persist_probability, 1e-12);
  }
}

TEST(Synth, NoReciprocityMeansNoReverseCalls) {
  auto cfg = small();
  cfg.reciprocity = 0.0;
  const auto corpus = generate(cfg);
  const auto pair = split_windows(corpus.records, cfg.windows());
  for (const auto& e : label_edges(pair.tau1, pair.tau2)) ASSERT_EQ(e.features.c_ji, 0);
}

TEST(Synth, DegreesStayBelowRobotThreshold) {
  const auto corpus = generate(small());
  const auto pair = split_windows(corpus.records, corpus.config.windows());
  for (VertexIndex v = 0; v < pair.tau1.vertex_count(); ++v) EXPECT_LT(pair.tau1.out_degree(v), 50u);
}

TEST(Synth, CountFeaturesAreRightSkewed) {
  const auto corpus = generate(small());
  const auto pair = split_windows(corpus.records, corpus.config.windows());
  const auto s = summarize(label_edges(pair.tau1, pair.tau2));
  for (auto f : {Feature::d_i, Feature::c_i, Feature::c_ij}) EXPECT_LT(s[f].median, s[f].mean);
}

TEST(Synth, TruthRoundTripsAndIdentifiesPreset) {
  const auto corpus = generate(small());
  const auto report = describe_truth(corpus.truth_json());
  EXPECT_EQ(report.preset, "paperlike");
  EXPECT_EQ(report.seed, 3u);
  EXPECT_EQ(report.intercept, corpus.intercept);
  EXPECT_EQ(report.coefficients, synth_preset("paperlike", 3).rule.coefficients);
  EXPECT_EQ(report, describe_truth(generate(small()).truth_json()));
  const auto cfg_back = SynthConfig::from_json(corpus.config.to_json());
  EXPECT_EQ(cfg_back.to_json(), corpus.config.to_json());
}

TEST(Synth, ForeignTruthIsRejected) {
  EXPECT_THROW(describe_truth(nlohmann::json{{"generator", "other"}}), DataError);
  EXPECT_THROW(describe_truth(nlohmann::json::array()), DataError);
}

TEST(Synth, InfeasibleConfigsAreDiagnosed) {
  auto cfg = small();
  cfg.max_out_degree = 60;
  EXPECT_THROW(generate(cfg), DataError);
  cfg = small();
  cfg.reciprocity = 1.5;
  EXPECT_THROW(generate(cfg), DataError);
  cfg = small();
  cfg.rule.target_persist_share = 1.0;
  EXPECT_ANY_THROW(generate(cfg));
  EXPECT_THROW(synth_preset("nope", 1), UsageError);
}

TEST(Synth, BayesRateIsMeanOfMaxProbability) {
  const std::vector<TruthEdge> e{{"a", "b", 0.9, 1}, {"a", "c", 0.2, 0}, {"b", "c", 0.5, 1}};
  EXPECT_NEAR(bayes_rate(e), (0.9 + 0.8 + 0.5) / 3, 1e-15);
}

TEST(Synth, ClusteringOfTriangleAndPath) {
  const std::vector<CallRecord> tri{{"a", "b", 1, 1, CallType::voice}, {"b", "c", 1, 1, CallType::voice},
                                    {"c", "a", 1, 1, CallType::voice}};
  EXPECT_DOUBLE_EQ(average_clustering(build_window_graph(tri, {0, 10})), 1.0);
  const std::vector<CallRecord> path{{"a", "b", 1, 1, CallType::voice}, {"b", "c", 1, 1, CallType::voice}};
  EXPECT_DOUBLE_EQ(average_clustering(build_window_graph(path, {0, 10})), 0.0);
}

TEST(Synth, CorrelationSignsOnDefaultPreset) {
  auto cfg = synth_preset("paperlike", 12);
  cfg.n_vertices = 6000;
  const auto pair = split_windows(generate(cfg).records, cfg.windows());
  const auto corr = spearman_matrix(FeatureMatrix(label_edges(pair.tau1, pair.tau2)));
  EXPECT_GT(*corr.at(Feature::d_i, Feature::c_i), 0.5);
  EXPECT_LT(*corr.at(Feature::d_i, Feature::p_ij), 0.0);
}
