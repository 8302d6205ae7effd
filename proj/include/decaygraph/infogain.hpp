#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decaygraph/edge_features.hpp"
#include "decaygraph/feature_io.hpp"

namespace decaygraph {

struct ClassDistribution {
  std::int64_t n_persist = 0;
  std::int64_t n_decay = 0;

  std::int64_t total() const { return n_persist + n_decay; }
  void add(int label) { label ? ++n_persist : ++n_decay; }
  ClassDistribution& operator+=(const ClassDistribution& o) {
    n_persist += o.n_persist;
    n_decay += o.n_decay;
    return *this;
  }
  friend bool operator==(const ClassDistribution&, const ClassDistribution&) = default;
};

// weighted: sum_k P(F=k) H_k.  unweighted: sum_k H_k / |K|.
enum class GainMode { weighted, unweighted };

// Binary entropy in bits, 0 log 0 = 0. DataError for an empty distribution.
double entropy(const ClassDistribution& d);

// DataError on an empty partition or an empty bucket.
double conditional_entropy(std::span<const ClassDistribution> buckets,
                           GainMode mode = GainMode::weighted);

// H(class) - H(class | partition), with the class distribution taken as the
// sum of the buckets.
double partition_gain(std::span<const ClassDistribution> buckets,
                      GainMode mode = GainMode::weighted);

// Gain of a feature treated as categorical: one bucket per distinct value.
double info_gain(std::span<const double> values, std::span<const int> labels,
                 GainMode mode = GainMode::weighted);

enum class DiscretizationKind { categorical, best_binary_split, equal_frequency };

struct Discretization {
  DiscretizationKind kind = DiscretizationKind::best_binary_split;
  std::size_t bins = 4;  // equal_frequency only
};

// Bucket b holds values in (thresholds[b-1], thresholds[b]]; the last bucket
// is everything above the last threshold. Categorical descriptors list the
// distinct values instead.
struct PartitionDescriptor {
  DiscretizationKind kind = DiscretizationKind::best_binary_split;
  std::vector<double> thresholds;
  std::vector<double> categories;
  double gain = 0.0;

  std::size_t bucket_count() const {
    return kind == DiscretizationKind::categorical ? categories.size() : thresholds.size() + 1;
  }
  std::size_t bucket_of(double v) const;
};

PartitionDescriptor discretize_numeric(std::span<const double> values, std::span<const int> labels,
                                       const Discretization& how = {},
                                       GainMode mode = GainMode::weighted);

// Numeric info gain after discretizing with `how`.
double info_gain(std::span<const double> values, std::span<const int> labels,
                 const Discretization& how, GainMode mode = GainMode::weighted);

struct SplitCandidate {
  double threshold = 0.0;  // left side is value <= threshold
  double gain = 0.0;       // weighted
  ClassDistribution left, right;
};

// Scans every midpoint between consecutive distinct values of an ascending
// sample and returns the weighted-gain maximizer whose sides both hold at
// least min_leaf rows. Near-ties (within 1e-12 bits) keep the lower threshold.
std::optional<SplitCandidate> best_sorted_split(std::span<const double> sorted_values,
                                                std::span<const int> labels_in_order,
                                                std::size_t min_leaf = 1);

struct RankedFeature {
  Feature feature;
  double gain;
  PartitionDescriptor partition;
};

struct FeatureRanking {
  GainMode mode = GainMode::weighted;
  Discretization discretization;
  std::vector<RankedFeature> entries;  // descending gain, ties in column order
};

FeatureRanking rank_features(const FeatureMatrix& m, GainMode mode = GainMode::weighted,
                             const Discretization& how = {});

std::string to_string(GainMode m);
std::string to_string(DiscretizationKind k);
GainMode parse_gain_mode(const std::string& s);
DiscretizationKind parse_discretization(const std::string& s);

}  // namespace decaygraph
