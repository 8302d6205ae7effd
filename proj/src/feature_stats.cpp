#include "decaygraph/feature_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "decaygraph/errors.hpp"
#include "decaygraph/kernels.hpp"

namespace decaygraph {

ColumnSummary summarize_column(std::span<const double> values) {
  if (values.empty()) throw DataError("summarize: empty input");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  ColumnSummary s;
  const std::size_t n = sorted.size();
  s.min = sorted.front();
  s.max = sorted.back();
  s.median = sorted[(n - 1) / 2];
  s.mean = kernels::sum(sorted) / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (k + 1 < n && sorted[k + 1] == sorted[k]) continue;
    s.cdf.push_back({sorted[k], static_cast<double>(k + 1) / static_cast<double>(n)});
  }
  return s;
}

FeatureSummary summarize(const FeatureMatrix& m) {
  if (m.rows() == 0) throw DataError("summarize: empty input");
  FeatureSummary out;
  out.count = m.rows();
  for (std::size_t f = 0; f < kFeatureCount; ++f) out.columns[f] = summarize_column(m.column(f));
  return out;
}

FeatureSummary summarize(std::span<const LabeledEdge> edges) {
  return summarize(FeatureMatrix(edges));
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) hold ranks i+1..j+1
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("correlation: length mismatch");
  if (x.size() < 2) throw DataError("correlation: need at least two observations");
  const double n = static_cast<double>(x.size());
  const double mx = kernels::sum(x) / n;
  const double my = kernels::sum(y) / n;
  const double sxy = kernels::centered_dot(x, mx, y, my);
  const double sxx = kernels::centered_dot(x, mx, x, mx);
  const double syy = kernels::centered_dot(y, my, y, my);
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("correlation: length mismatch");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

CorrelationMatrix spearman_matrix(const FeatureMatrix& m) {
  if (m.rows() < 2) throw DataError("correlation: need at least two edges");
  std::array<std::vector<double>, kFeatureCount> ranks;
  std::array<bool, kFeatureCount> constant{};
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    ranks[f] = average_ranks(m.column(f));
    const auto col = m.column(f);
    constant[f] = std::all_of(col.begin(), col.end(), [&](double v) { return v == col[0]; });
  }
  CorrelationMatrix out;
  for (std::size_t a = 0; a < kFeatureCount; ++a) {
    out.rho[a][a] = constant[a] ? std::nullopt : std::optional<double>(1.0);
    for (std::size_t b = a + 1; b < kFeatureCount; ++b) {
      const auto r = pearson(ranks[a], ranks[b]);
      out.rho[a][b] = r;
      out.rho[b][a] = r;
    }
  }
  return out;
}

}  // namespace decaygraph
