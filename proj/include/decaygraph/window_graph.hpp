#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "decaygraph/records.hpp"

namespace decaygraph {

// Half-open interval [start, end).
struct TimeWindow {
  Timestamp start = 0;
  Timestamp end = 0;

  bool contains(Timestamp t) const { return t >= start && t < end; }
  std::int64_t length() const { return end - start; }
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

struct WindowConfig {
  Timestamp t0 = 0;
  std::int64_t delta1 = 0;
  std::int64_t delta2 = 0;

  TimeWindow tau1() const { return {t0, t0 + delta1}; }
  TimeWindow tau2() const { return {t0 + delta1, t0 + delta1 + delta2}; }
  void validate() const;
};

struct ArcStats {
  std::int64_t call_count = 0;
  Timestamp first_call = 0;
  Timestamp last_call = 0;
  std::int64_t total_duration = 0;

  friend bool operator==(const ArcStats&, const ArcStats&) = default;
};

using VertexIndex = std::uint32_t;

struct Arc {
  VertexIndex source;
  VertexIndex target;
  ArcStats stats;

  friend bool operator==(const Arc&, const Arc&) = default;
};

// Immutable directed weighted graph for one window. Vertices are the
// endpoints of stored arcs, indexed in lexicographic order of their ids; arcs
// are sorted by (source, target), so two graphs built from the same calls in
// any order compare equal.
class WindowGraph {
 public:
  WindowGraph() = default;
  WindowGraph(TimeWindow window, std::vector<VertexId> names, std::vector<Arc> arcs);

  const TimeWindow& window() const { return window_; }
  std::size_t vertex_count() const { return names_.size(); }
  std::size_t arc_count() const { return arcs_.size(); }
  bool empty() const { return arcs_.empty(); }

  const std::vector<VertexId>& names() const { return names_; }
  const VertexId& name(VertexIndex v) const { return names_[v]; }
  std::optional<VertexIndex> index_of(const VertexId& id) const;

  std::span<const Arc> arcs() const { return arcs_; }
  // Out-arcs of v, sorted by target.
  std::span<const Arc> out_arcs(VertexIndex v) const;
  // Sources u of arcs (u, v), sorted ascending.
  std::span<const VertexIndex> in_neighbors(VertexIndex v) const;
  // Distinct any-direction contacts of v, sorted ascending, v excluded.
  std::span<const VertexIndex> contacts(VertexIndex v) const;

  std::size_t out_degree(VertexIndex v) const { return out_arcs(v).size(); }
  std::int64_t out_calls(VertexIndex v) const { return out_calls_[v]; }

  const ArcStats* find(VertexIndex source, VertexIndex target) const;
  const ArcStats* find(const VertexId& source, const VertexId& target) const;

  friend bool operator==(const WindowGraph& a, const WindowGraph& b) {
    return a.window_ == b.window_ && a.names_ == b.names_ && a.arcs_ == b.arcs_;
  }

 private:
  TimeWindow window_;
  std::vector<VertexId> names_;
  std::unordered_map<VertexId, VertexIndex> index_;
  std::vector<Arc> arcs_;
  std::vector<std::size_t> out_offsets_;
  std::vector<std::size_t> in_offsets_;
  std::vector<VertexIndex> in_sources_;
  std::vector<std::size_t> contact_offsets_;
  std::vector<VertexIndex> contact_list_;
  std::vector<std::int64_t> out_calls_;
};

// Aggregates the calls falling inside `window` into one arc per directed pair.
WindowGraph build_window_graph(std::span<const CallRecord> records, TimeWindow window);

enum class NeighborMode { out, total };

struct RobotFilterConfig {
  std::size_t max_neighbors = 50;
  NeighborMode mode = NeighborMode::out;
};

struct FilterResult {
  WindowGraph graph;
  std::vector<VertexId> removed;  // sorted
};

// Drops every vertex whose neighbor count is >= max_neighbors, together with
// all arcs touching it.
FilterResult apply_robot_filter(const WindowGraph& g, const RobotFilterConfig& cfg = {});

// Drops the given vertices (by id) and every arc touching them.
WindowGraph remove_vertices(const WindowGraph& g, std::span<const VertexId> removed);

struct WindowPair {
  WindowGraph tau1;
  WindowGraph tau2;
  std::vector<VertexId> removed;
};

// Builds both window graphs; robots detected in tau1 are removed from both.
WindowPair split_windows(std::span<const CallRecord> records, const WindowConfig& cfg,
                         const RobotFilterConfig& filter = {});

// Arc-list CSV: a `# window,START,END` line, a header, then
// `i,j,count,first,last,duration` rows.
void write_window_graph(std::ostream& out, const WindowGraph& g);
void write_window_graph_file(const std::string& path, const WindowGraph& g);
WindowGraph read_window_graph(std::istream& in);
WindowGraph read_window_graph_file(const std::string& path);

std::string to_string(NeighborMode m);
NeighborMode parse_neighbor_mode(const std::string& s);

}  // namespace decaygraph
