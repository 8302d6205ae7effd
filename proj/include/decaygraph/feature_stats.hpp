#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decaygraph/edge_features.hpp"
#include "decaygraph/feature_io.hpp"

namespace decaygraph {

struct CdfPoint {
  double value;
  double cumulative;  // fraction of observations <= value
};

struct ColumnSummary {
  double min = 0, max = 0, median = 0, mean = 0;
  std::vector<CdfPoint> cdf;  // one point per distinct value, ascending
};

struct FeatureSummary {
  std::size_t count = 0;
  std::array<ColumnSummary, kFeatureCount> columns;
  const ColumnSummary& operator[](Feature f) const {
    return columns[static_cast<std::size_t>(f)];
  }
};

// Median is the lower median for even counts: element (n-1)/2 of the sorted
// sample.
ColumnSummary summarize_column(std::span<const double> values);
FeatureSummary summarize(const FeatureMatrix& m);
FeatureSummary summarize(std::span<const LabeledEdge> edges);

// 1-based ranks; tied values share the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation; nullopt when either side has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

struct CorrelationMatrix {
  // nullopt marks an undefined coefficient (zero-variance column).
  std::array<std::array<std::optional<double>, kFeatureCount>, kFeatureCount> rho;
  const std::optional<double>& at(Feature a, Feature b) const {
    return rho[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  }
};

// Needs at least two rows. The diagonal is 1 for every column with
// non-zero variance.
CorrelationMatrix spearman_matrix(const FeatureMatrix& m);

}  // namespace decaygraph
