#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "decaygraph/window_graph.hpp"

namespace decaygraph {

inline constexpr std::size_t kFeatureCount = 15;

// Column order used everywhere: files, rankings, models.
enum class Feature : std::size_t {
  d_i, d_j, c_i, c_j, c_ij, c_ji, p_ij, p_ji, cn, in, jn, injn, jnin, fdate, edate
};

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{
    "d_i", "d_j", "c_i", "c_j", "c_ij", "c_ji", "p_ij", "p_ji",
    "cn",  "in",  "jn",  "injn", "jnin", "fdate", "edate"};

std::string_view feature_name(Feature f);
std::optional<Feature> parse_feature(std::string_view name);

struct EdgeFeatureVector {
  // vertex level
  std::int64_t d_i = 0;
  std::int64_t d_j = 0;
  std::int64_t c_i = 0;
  std::int64_t c_j = 0;
  // dyad level
  std::int64_t c_ij = 0;
  std::int64_t c_ji = 0;
  double p_ij = 0.0;
  double p_ji = 0.0;
  // neighborhood level
  std::int64_t cn = 0;
  std::int64_t in_ = 0;
  std::int64_t jn = 0;
  std::int64_t injn = 0;
  std::int64_t jnin = 0;
  // temporal
  double fdate = 0.0;
  double edate = 0.0;

  std::array<double, kFeatureCount> values() const;
  double operator[](Feature f) const { return values()[static_cast<std::size_t>(f)]; }
  static EdgeFeatureVector from_values(const std::array<double, kFeatureCount>& v);

  friend bool operator==(const EdgeFeatureVector&, const EdgeFeatureVector&) = default;
};

struct LabeledEdge {
  VertexId source;
  VertexId target;
  EdgeFeatureVector features;
  int label = 0;  // 1 = persistent, 0 = decayed

  friend bool operator==(const LabeledEdge&, const LabeledEdge&) = default;
};

enum class InjnMode { arcs, calls };
enum class PersistMode { directed, either };

struct FeatureOptions {
  InjnMode injn_mode = InjnMode::arcs;
  PersistMode persist_mode = PersistMode::directed;
  unsigned threads = 1;
};

struct VertexFeatures {
  std::int64_t d_i, d_j, c_i, c_j;
};
struct DyadFeatures {
  std::int64_t c_ij, c_ji;
  double p_ij, p_ji;
};
struct NeighborhoodFeatures {
  std::int64_t cn, in_, jn, injn, jnin;
};
struct TemporalFeatures {
  double fdate, edate;
};

// All per-arc operations require arc (i, j) to exist in g; DataError otherwise.
VertexFeatures vertex_features(const WindowGraph& g, VertexIndex i, VertexIndex j);
DyadFeatures dyad_features(const WindowGraph& g, VertexIndex i, VertexIndex j);
NeighborhoodFeatures neighborhood_features(const WindowGraph& g, VertexIndex i, VertexIndex j,
                                           InjnMode mode = InjnMode::arcs);
TemporalFeatures temporal_features(const WindowGraph& g, VertexIndex i, VertexIndex j);

EdgeFeatureVector edge_features(const WindowGraph& g, VertexIndex i, VertexIndex j,
                                InjnMode mode = InjnMode::arcs);

// One labeled edge per tau1 arc, in tau1 arc order.
std::vector<LabeledEdge> label_edges(const WindowGraph& tau1, const WindowGraph& tau2,
                                     const FeatureOptions& opts = {});

std::string to_string(InjnMode m);
std::string to_string(PersistMode m);
InjnMode parse_injn_mode(const std::string& s);
PersistMode parse_persist_mode(const std::string& s);

}  // namespace decaygraph
