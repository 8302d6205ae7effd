#include "decaygraph/infogain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "decaygraph/errors.hpp"

namespace decaygraph {

namespace {

constexpr double kGainTieEpsilon = 1e-12;

double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

void check_lengths(std::span<const double> values, std::span<const int> labels) {
  if (values.size() != labels.size()) throw DataError("info gain: length mismatch");
  if (values.empty()) throw DataError("info gain: empty input");
}

}  // namespace

double entropy(const ClassDistribution& d) {
  if (d.n_persist < 0 || d.n_decay < 0) throw DataError("entropy: negative count");
  const auto n = d.total();
  if (n == 0) throw DataError("entropy: empty class distribution");
  const double p = static_cast<double>(d.n_persist) / static_cast<double>(n);
  const double q = static_cast<double>(d.n_decay) / static_cast<double>(n);
  if (p == 0.0 || q == 0.0) return 0.0;
  return -plogp(p) - plogp(q);
}

double conditional_entropy(std::span<const ClassDistribution> buckets, GainMode mode) {
  if (buckets.empty()) throw DataError("conditional entropy: empty partition");
  std::int64_t total = 0;
  for (const auto& b : buckets) {
    if (b.total() == 0) throw DataError("conditional entropy: empty bucket");
    total += b.total();
  }
  double h = 0.0;
  for (const auto& b : buckets) {
    const double weight = mode == GainMode::weighted
                              ? static_cast<double>(b.total()) / static_cast<double>(total)
                              : 1.0 / static_cast<double>(buckets.size());
    h += weight * entropy(b);
  }
  return h;
}

double partition_gain(std::span<const ClassDistribution> buckets, GainMode mode) {
  ClassDistribution all;
  for (const auto& b : buckets) all += b;
  const double gain = entropy(all) - conditional_entropy(buckets, mode);
  return mode == GainMode::weighted ? std::max(0.0, gain) : gain;
}

double info_gain(std::span<const double> values, std::span<const int> labels, GainMode mode) {
  check_lengths(values, labels);
  std::map<double, ClassDistribution> buckets;
  for (std::size_t k = 0; k < values.size(); ++k) buckets[values[k]].add(labels[k]);
  std::vector<ClassDistribution> parts;
  parts.reserve(buckets.size());
  for (const auto& [v, d] : buckets) parts.push_back(d);
  return partition_gain(parts, mode);
}

std::size_t PartitionDescriptor::bucket_of(double v) const {
  if (kind == DiscretizationKind::categorical) {
    auto it = std::lower_bound(categories.begin(), categories.end(), v);
    if (it == categories.end() || *it != v) return categories.size();
    return static_cast<std::size_t>(it - categories.begin());
  }
  return static_cast<std::size_t>(std::lower_bound(thresholds.begin(), thresholds.end(), v) -
                                  thresholds.begin());
}

std::optional<SplitCandidate> best_sorted_split(std::span<const double> sorted_values,
                                                std::span<const int> labels_in_order,
                                                std::size_t min_leaf) {
  const std::size_t n = sorted_values.size();
  if (n != labels_in_order.size()) throw DataError("split search: length mismatch");
  if (n < 2) return std::nullopt;
  min_leaf = std::max<std::size_t>(1, min_leaf);
  ClassDistribution all;
  for (int y : labels_in_order) all.add(y);
  const double h_all = entropy(all);
  const double total = static_cast<double>(n);

  std::optional<SplitCandidate> best;
  ClassDistribution left;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    left.add(labels_in_order[k]);
    if (sorted_values[k] == sorted_values[k + 1]) continue;
    const std::size_t n_left = k + 1;
    if (n_left < min_leaf || n - n_left < min_leaf) continue;
    ClassDistribution right{all.n_persist - left.n_persist, all.n_decay - left.n_decay};
    const double h = (static_cast<double>(n_left) / total) * entropy(left) +
                     (static_cast<double>(n - n_left) / total) * entropy(right);
    const double gain = std::max(0.0, h_all - h);
    if (!best || gain > best->gain + kGainTieEpsilon) {
      // Midpoint; falls back to the lower value if the midpoint rounds up.
      double t = sorted_values[k] + 0.5 * (sorted_values[k + 1] - sorted_values[k]);
      if (!(t < sorted_values[k + 1])) t = sorted_values[k];
      best = SplitCandidate{t, gain, left, right};
    }
  }
  return best;
}

PartitionDescriptor discretize_numeric(std::span<const double> values, std::span<const int> labels,
                                       const Discretization& how, GainMode mode) {
  check_lengths(values, labels);
  PartitionDescriptor d;
  d.kind = how.kind;

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> sorted(values.size());
  std::vector<int> sorted_labels(values.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    sorted[k] = values[order[k]];
    sorted_labels[k] = labels[order[k]];
  }

  switch (how.kind) {
    case DiscretizationKind::categorical:
      d.categories = sorted;
      d.categories.erase(std::unique(d.categories.begin(), d.categories.end()),
                         d.categories.end());
      break;
    case DiscretizationKind::best_binary_split:
      if (auto s = best_sorted_split(sorted, sorted_labels, 1)) d.thresholds.push_back(s->threshold);
      break;
    case DiscretizationKind::equal_frequency: {
      if (how.bins < 1) throw UsageError("equal-frequency discretization needs >= 1 bin");
      const std::size_t n = sorted.size();
      for (std::size_t q = 1; q < how.bins; ++q) {
        const std::size_t pos = (q * n + how.bins - 1) / how.bins;  // ceil(q n / k)
        if (pos == 0 || pos >= n) continue;
        const double t = sorted[pos - 1];
        if (t == sorted.back()) continue;
        if (d.thresholds.empty() || d.thresholds.back() < t) d.thresholds.push_back(t);
      }
      break;
    }
  }

  std::vector<ClassDistribution> buckets(d.bucket_count());
  for (std::size_t k = 0; k < values.size(); ++k) buckets[d.bucket_of(values[k])].add(labels[k]);
  std::erase_if(buckets, [](const ClassDistribution& b) { return b.total() == 0; });
  d.gain = partition_gain(buckets, mode);
  return d;
}

double info_gain(std::span<const double> values, std::span<const int> labels,
                 const Discretization& how, GainMode mode) {
  return discretize_numeric(values, labels, how, mode).gain;
}

FeatureRanking rank_features(const FeatureMatrix& m, GainMode mode, const Discretization& how) {
  if (m.rows() == 0) throw DataError("rank: empty edge set");
  FeatureRanking r;
  r.mode = mode;
  r.discretization = how;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    auto part = discretize_numeric(m.column(f), m.labels(), how, mode);
    const double g = part.gain;
    r.entries.push_back({static_cast<Feature>(f), g, std::move(part)});
  }
  std::stable_sort(r.entries.begin(), r.entries.end(),
                   [](const RankedFeature& a, const RankedFeature& b) { return a.gain > b.gain; });
  return r;
}

std::string to_string(GainMode m) { return m == GainMode::weighted ? "weighted" : "unweighted"; }

std::string to_string(DiscretizationKind k) {
  switch (k) {
    case DiscretizationKind::categorical: return "categorical";
    case DiscretizationKind::best_binary_split: return "best-binary-split";
    case DiscretizationKind::equal_frequency: return "equal-frequency";
  }
  return "best-binary-split";
}

GainMode parse_gain_mode(const std::string& s) {
  if (s == "weighted") return GainMode::weighted;
  if (s == "unweighted") return GainMode::unweighted;
  throw UsageError("unknown gain mode: " + s);
}

DiscretizationKind parse_discretization(const std::string& s) {
  if (s == "categorical") return DiscretizationKind::categorical;
  if (s == "best-binary-split") return DiscretizationKind::best_binary_split;
  if (s == "equal-frequency") return DiscretizationKind::equal_frequency;
  throw UsageError("unknown discretization: " + s);
}

}  // namespace decaygraph
