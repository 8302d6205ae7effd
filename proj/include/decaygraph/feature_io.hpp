#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "decaygraph/edge_features.hpp"

namespace decaygraph {

// Column-major copy of labeled edges, the layout the learners and
// statistics kernels consume.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(std::span<const LabeledEdge> edges);

  std::size_t rows() const { return labels_.size(); }
  std::span<const double> column(Feature f) const {
    return columns_[static_cast<std::size_t>(f)];
  }
  std::span<const double> column(std::size_t f) const { return columns_[f]; }
  std::span<const int> labels() const { return labels_; }
  std::array<double, kFeatureCount> row(std::size_t r) const;

 private:
  std::array<std::vector<double>, kFeatureCount> columns_;
  std::vector<int> labels_;
};

// `source,target,d_i,...,edate,class`; integers printed as integers and
// fractions in shortest round-trip form, so write/read is lossless.
void write_features(std::ostream& out, std::span<const LabeledEdge> edges);
void write_features_file(const std::string& path, std::span<const LabeledEdge> edges);
std::vector<LabeledEdge> read_features(std::istream& in);
std::vector<LabeledEdge> read_features_file(const std::string& path);

std::string format_double(double v);

}  // namespace decaygraph
