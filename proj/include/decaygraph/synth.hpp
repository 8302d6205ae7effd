#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "decaygraph/edge_features.hpp"
#include "decaygraph/records.hpp"
#include "decaygraph/window_graph.hpp"

namespace decaygraph {

// Persistence probability of a tau1 arc: sigmoid(intercept + sum beta_f x_f)
// over the arc's extracted features.
struct PlantedRule {
  double intercept = 0.0;
  std::map<Feature, double> coefficients;
  // When set, the intercept is solved for so the mean planted probability
  // over tau1 arcs equals this share.
  std::optional<double> target_persist_share;

  double probability(const EdgeFeatureVector& x) const;
  double linear(const EdgeFeatureVector& x) const;
};

struct SynthConfig {
  std::string preset = "custom";
  std::uint64_t seed = 1;
  std::size_t n_vertices = 20000;
  Timestamp t0 = 1199145600;  // 2008-01-01T00:00:00Z
  std::int64_t window_seconds = 28 * 86400;

  // Out-degree: round(lognormal(mu, sigma)) clamped to [1, max_out_degree].
  double degree_log_mean = 0.85;
  double degree_log_sd = 0.8;
  std::size_t max_out_degree = 40;
  // Target popularity weights ~ Pareto(alpha); smaller alpha = heavier tail.
  double popularity_alpha = 2.5;
  double reciprocity = 0.45;
  double triadic_closure = 0.35;

  // Per-dyad call rate ~ lognormal; arc call counts are 1 + Poisson(rate).
  double rate_log_mean = 0.3;
  double rate_log_sd = 1.0;
  // Share of tau1 arcs already active at the window start; the rest start at a
  // uniform time inside the window.
  double established_share = 0.55;
  double mean_duration = 120.0;
  // New tau2-only arcs, as a fraction of the tau1 arc count.
  double new_arc_share = 0.1;

  PlantedRule rule;

  void validate() const;
  WindowConfig windows() const { return {t0, window_seconds, window_seconds}; }

  nlohmann::json to_json() const;
  static SynthConfig from_json(const nlohmann::json& j);
};

// Named presets: "paperlike" (signed mechanism over d_i, c_ij, c_ji, cn, fdate,
// edate; 57/43 class balance) and "cij-steep" (steep logistic in c_ij alone).
SynthConfig synth_preset(const std::string& name, std::uint64_t seed);

struct TruthEdge {
  VertexId source;
  VertexId target;
  double persist_probability;
  int label;
};

struct SynthStats {
  std::size_t vertices = 0;
  std::size_t arcs = 0;
  std::size_t records = 0;
  double persist_share = 0.0;
  double median_out_degree = 0.0;  // over vertices with out-degree >= 1
  double mean_out_degree = 0.0;
  double clustering = 0.0;         // undirected, vertices with degree >= 2
  double bayes_rate = 0.0;         // mean of max(p, 1 - p)
};

struct SynthCorpus {
  SynthConfig config;
  double intercept = 0.0;  // the rule intercept actually used
  std::vector<CallRecord> records;
  std::vector<TruthEdge> truth;  // tau1 arc order
  SynthStats stats;

  nlohmann::json truth_json() const;
};

// DataError with a diagnosis when the config cannot be realized.
SynthCorpus generate(const SynthConfig& cfg);

// Writes records.csv, truth.json and truth_edges.csv into dir.
void write_corpus(const SynthCorpus& corpus, const std::string& dir);

struct TruthReport {
  std::string preset;
  std::uint64_t seed = 0;
  WindowConfig windows;
  double intercept = 0.0;
  std::map<Feature, double> coefficients;
  SynthConfig config;

  friend bool operator==(const TruthReport& a, const TruthReport& b) {
    return a.preset == b.preset && a.seed == b.seed && a.windows.t0 == b.windows.t0 &&
           a.windows.delta1 == b.windows.delta1 && a.windows.delta2 == b.windows.delta2 &&
           a.intercept == b.intercept && a.coefficients == b.coefficients;
  }
};

// DataError for files not written by this generator.
TruthReport describe_truth(const nlohmann::json& truth);
TruthReport describe_truth_file(const std::string& path);

double bayes_rate(std::span<const TruthEdge> edges);

// Average local clustering of the undirected projection over vertices with
// at least two contacts.
double average_clustering(const WindowGraph& g);

}  // namespace decaygraph
