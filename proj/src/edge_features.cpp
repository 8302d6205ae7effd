#include "decaygraph/edge_features.hpp"

#include <algorithm>
#include <thread>

#include "decaygraph/errors.hpp"

namespace decaygraph {

std::string_view feature_name(Feature f) { return kFeatureNames[static_cast<std::size_t>(f)]; }

std::optional<Feature> parse_feature(std::string_view name) {
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    if (kFeatureNames[k] == name) return static_cast<Feature>(k);
  }
  return std::nullopt;
}

std::array<double, kFeatureCount> EdgeFeatureVector::values() const {
  return {static_cast<double>(d_i),  static_cast<double>(d_j),  static_cast<double>(c_i),
          static_cast<double>(c_j),  static_cast<double>(c_ij), static_cast<double>(c_ji),
          p_ij,                      p_ji,                      static_cast<double>(cn),
          static_cast<double>(in_),  static_cast<double>(jn),   static_cast<double>(injn),
          static_cast<double>(jnin), fdate,                     edate};
}

EdgeFeatureVector EdgeFeatureVector::from_values(const std::array<double, kFeatureCount>& v) {
  auto i64 = [&](Feature f) { return static_cast<std::int64_t>(v[static_cast<std::size_t>(f)]); };
  auto dbl = [&](Feature f) { return v[static_cast<std::size_t>(f)]; };
  EdgeFeatureVector e;
  e.d_i = i64(Feature::d_i);
  e.d_j = i64(Feature::d_j);
  e.c_i = i64(Feature::c_i);
  e.c_j = i64(Feature::c_j);
  e.c_ij = i64(Feature::c_ij);
  e.c_ji = i64(Feature::c_ji);
  e.p_ij = dbl(Feature::p_ij);
  e.p_ji = dbl(Feature::p_ji);
  e.cn = i64(Feature::cn);
  e.in_ = i64(Feature::in);
  e.jn = i64(Feature::jn);
  e.injn = i64(Feature::injn);
  e.jnin = i64(Feature::jnin);
  e.fdate = dbl(Feature::fdate);
  e.edate = dbl(Feature::edate);
  return e;
}

namespace {

const ArcStats& require_arc(const WindowGraph& g, VertexIndex i, VertexIndex j) {
  const ArcStats* s = g.find(i, j);
  if (s == nullptr) throw DataError("edge features requested for a missing arc");
  return *s;
}

bool sorted_contains(std::span<const VertexIndex> xs, VertexIndex v) {
  return std::binary_search(xs.begin(), xs.end(), v);
}

// |a ∩ b| over sorted lists, ignoring the two focal vertices.
std::int64_t intersect_count(std::span<const VertexIndex> a, std::span<const VertexIndex> b,
                             VertexIndex i, VertexIndex j) {
  std::int64_t n = 0;
  auto x = a.begin();
  auto y = b.begin();
  while (x != a.end() && y != b.end()) {
    if (*x < *y) {
      ++x;
    } else if (*y < *x) {
      ++y;
    } else {
      if (*x != i && *x != j) ++n;
      ++x;
      ++y;
    }
  }
  return n;
}

// Arcs (or calls) from contacts(from) to contacts(to), focal pair excluded.
std::int64_t cross_arcs(const WindowGraph& g, VertexIndex from, VertexIndex to, VertexIndex i,
                        VertexIndex j, InjnMode mode) {
  const auto targets = g.contacts(to);
  std::int64_t n = 0;
  for (VertexIndex u : g.contacts(from)) {
    if (u == i || u == j) continue;
    for (const Arc& a : g.out_arcs(u)) {
      if (a.target == i || a.target == j || !sorted_contains(targets, a.target)) continue;
      n += mode == InjnMode::arcs ? 1 : a.stats.call_count;
    }
  }
  return n;
}

}  // namespace

VertexFeatures vertex_features(const WindowGraph& g, VertexIndex i, VertexIndex j) {
  require_arc(g, i, j);
  return {static_cast<std::int64_t>(g.out_degree(i)), static_cast<std::int64_t>(g.out_degree(j)),
          g.out_calls(i), g.out_calls(j)};
}

DyadFeatures dyad_features(const WindowGraph& g, VertexIndex i, VertexIndex j) {
  const ArcStats& ij = require_arc(g, i, j);
  const ArcStats* ji = g.find(j, i);
  DyadFeatures d;
  d.c_ij = ij.call_count;
  d.c_ji = ji ? ji->call_count : 0;
  d.p_ij = static_cast<double>(d.c_ij) / static_cast<double>(g.out_calls(i));
  const std::int64_t c_j = g.out_calls(j);
  d.p_ji = c_j == 0 ? 0.0 : static_cast<double>(d.c_ji) / static_cast<double>(c_j);
  return d;
}

NeighborhoodFeatures neighborhood_features(const WindowGraph& g, VertexIndex i, VertexIndex j,
                                           InjnMode mode) {
  require_arc(g, i, j);
  NeighborhoodFeatures f;
  f.cn = intersect_count(g.contacts(i), g.contacts(j), i, j);
  f.in_ = intersect_count(g.contacts(i), g.in_neighbors(j), i, j);
  f.jn = intersect_count(g.contacts(j), g.in_neighbors(i), i, j);
  f.injn = cross_arcs(g, i, j, i, j, mode);
  f.jnin = cross_arcs(g, j, i, i, j, mode);
  return f;
}

TemporalFeatures temporal_features(const WindowGraph& g, VertexIndex i, VertexIndex j) {
  const ArcStats& s = require_arc(g, i, j);
  const TimeWindow& w = g.window();
  const double len = static_cast<double>(w.length());
  return {static_cast<double>(s.first_call - w.start) / len,
          static_cast<double>(s.last_call - w.start) / len};
}

EdgeFeatureVector edge_features(const WindowGraph& g, VertexIndex i, VertexIndex j,
                                InjnMode mode) {
  const auto v = vertex_features(g, i, j);
  const auto d = dyad_features(g, i, j);
  const auto n = neighborhood_features(g, i, j, mode);
  const auto t = temporal_features(g, i, j);
  EdgeFeatureVector e;
  e.d_i = v.d_i;
  e.d_j = v.d_j;
  e.c_i = v.c_i;
  e.c_j = v.c_j;
  e.c_ij = d.c_ij;
  e.c_ji = d.c_ji;
  e.p_ij = d.p_ij;
  e.p_ji = d.p_ji;
  e.cn = n.cn;
  e.in_ = n.in_;
  e.jn = n.jn;
  e.injn = n.injn;
  e.jnin = n.jnin;
  e.fdate = t.fdate;
  e.edate = t.edate;
  return e;
}

std::vector<LabeledEdge> label_edges(const WindowGraph& tau1, const WindowGraph& tau2,
                                     const FeatureOptions& opts) {
  const auto arcs = tau1.arcs();
  std::vector<LabeledEdge> out(arcs.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const Arc& a = arcs[k];
      LabeledEdge& e = out[k];
      e.source = tau1.name(a.source);
      e.target = tau1.name(a.target);
      e.features = edge_features(tau1, a.source, a.target, opts.injn_mode);
      bool persists = tau2.find(e.source, e.target) != nullptr;
      if (!persists && opts.persist_mode == PersistMode::either) {
        persists = tau2.find(e.target, e.source) != nullptr;
      }
      e.label = persists ? 1 : 0;
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, opts.threads);
  if (threads == 1 || arcs.size() < 1024) {
    work(0, arcs.size());
    return out;
  }
  // Each worker owns a contiguous slice of the output.
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (arcs.size() + threads - 1) / threads;
    for (std::size_t begin = 0; begin < arcs.size(); begin += chunk) {
      pool.emplace_back(work, begin, std::min(arcs.size(), begin + chunk));
    }
  }
  return out;
}

std::string to_string(InjnMode m) { return m == InjnMode::arcs ? "arcs" : "calls"; }
std::string to_string(PersistMode m) { return m == PersistMode::directed ? "directed" : "either"; }

InjnMode parse_injn_mode(const std::string& s) {
  if (s == "arcs") return InjnMode::arcs;
  if (s == "calls") return InjnMode::calls;
  throw UsageError("unknown injn mode: " + s);
}

PersistMode parse_persist_mode(const std::string& s) {
  if (s == "directed") return PersistMode::directed;
  if (s == "either") return PersistMode::either;
  throw UsageError("unknown persist mode: " + s);
}

}  // namespace decaygraph
