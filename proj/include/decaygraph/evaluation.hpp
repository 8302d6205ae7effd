#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "decaygraph/edge_features.hpp"

namespace decaygraph {

struct SplitConfig {
  double train_fraction = 2.0 / 3.0;
  std::uint64_t seed = 1;
  bool stratify = false;

  void validate() const;
};

struct SplitResult {
  std::vector<LabeledEdge> train;
  std::vector<LabeledEdge> test;
};

// Seeded random partition by edge. Train size is round(fraction * n) (per
// class when stratified); both parts keep the input order.
SplitResult split(std::span<const LabeledEdge> edges, const SplitConfig& cfg = {});

// Index form of split(): true marks a training row.
std::vector<bool> split_mask(std::span<const int> labels, const SplitConfig& cfg = {});

// Counts from the point of view of the persist class (label 1).
struct Confusion {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::int64_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct ClassMetrics {
  double accuracy = 0, precision = 0, recall = 0, f_measure = 0;
  friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

struct EvalReport {
  std::string model;
  Confusion confusion;
  ClassMetrics persist;
  ClassMetrics decay;
  std::vector<std::string> warnings;  // zero-denominator notes

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

double f_measure(double precision, double recall);

// Metrics for both classes; zero denominators give 0 plus a warning.
ClassMetrics class_metrics(std::int64_t tp, std::int64_t fp, std::int64_t tn, std::int64_t fn);
EvalReport evaluate(std::span<const int> predicted, std::span<const int> truth,
                    std::string model = "model");

// Metric rows by (model x class) columns, as plain text.
std::string compare(std::span<const EvalReport> reports);
nlohmann::json compare_json(std::span<const EvalReport> reports);

}  // namespace decaygraph
