#include "decaygraph/window_graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string_view>

#include "decaygraph/errors.hpp"

namespace decaygraph {

void WindowConfig::validate() const {
  if (delta1 <= 0 || delta2 <= 0) throw UsageError("window lengths must be positive");
}

WindowGraph::WindowGraph(TimeWindow window, std::vector<VertexId> names, std::vector<Arc> arcs)
    : window_(window), names_(std::move(names)), arcs_(std::move(arcs)) {
  const std::size_t n = names_.size();
  index_.reserve(n);
  for (VertexIndex v = 0; v < n; ++v) index_.emplace(names_[v], v);

  out_offsets_.assign(n + 1, 0);
  out_calls_.assign(n, 0);
  std::vector<std::size_t> in_count(n, 0);
  for (std::size_t k = 0; k < arcs_.size(); ++k) {
    const Arc& a = arcs_[k];
    if (a.source >= n || a.target >= n || a.source == a.target || a.stats.call_count < 1) {
      throw DataError("window graph: invalid arc");
    }
    if (k > 0) {
      const Arc& p = arcs_[k - 1];
      if (std::tie(p.source, p.target) >= std::tie(a.source, a.target)) {
        throw DataError("window graph: arcs must be unique and sorted");
      }
    }
    ++out_offsets_[a.source + 1];
    ++in_count[a.target];
    out_calls_[a.source] += a.stats.call_count;
  }
  for (std::size_t v = 0; v < n; ++v) out_offsets_[v + 1] += out_offsets_[v];

  in_offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) in_offsets_[v + 1] = in_offsets_[v] + in_count[v];
  in_sources_.resize(arcs_.size());
  std::vector<std::size_t> cursor(in_offsets_.begin(), in_offsets_.end() - 1);
  // Arcs are sorted by source, so each in-list fills in ascending order.
  for (const Arc& a : arcs_) in_sources_[cursor[a.target]++] = a.source;

  contact_offsets_.assign(n + 1, 0);
  contact_list_.reserve(2 * arcs_.size());
  for (VertexIndex v = 0; v < n; ++v) {
    auto outs = out_arcs(v);
    auto ins = in_neighbors(v);
    std::size_t i = 0, j = 0;
    while (i < outs.size() || j < ins.size()) {
      VertexIndex next;
      if (j == ins.size() || (i < outs.size() && outs[i].target < ins[j])) {
        next = outs[i++].target;
      } else if (i == outs.size() || ins[j] < outs[i].target) {
        next = ins[j++];
      } else {
        next = ins[j];
        ++i;
        ++j;
      }
      contact_list_.push_back(next);
    }
    contact_offsets_[v + 1] = contact_list_.size();
  }
}

std::optional<VertexIndex> WindowGraph::index_of(const VertexId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const Arc> WindowGraph::out_arcs(VertexIndex v) const {
  return std::span<const Arc>(arcs_).subspan(out_offsets_[v], out_offsets_[v + 1] - out_offsets_[v]);
}

std::span<const VertexIndex> WindowGraph::in_neighbors(VertexIndex v) const {
  return std::span<const VertexIndex>(in_sources_)
      .subspan(in_offsets_[v], in_offsets_[v + 1] - in_offsets_[v]);
}

std::span<const VertexIndex> WindowGraph::contacts(VertexIndex v) const {
  return std::span<const VertexIndex>(contact_list_)
      .subspan(contact_offsets_[v], contact_offsets_[v + 1] - contact_offsets_[v]);
}

const ArcStats* WindowGraph::find(VertexIndex source, VertexIndex target) const {
  if (source >= names_.size()) return nullptr;
  auto row = out_arcs(source);
  auto it = std::lower_bound(row.begin(), row.end(), target,
                             [](const Arc& a, VertexIndex t) { return a.target < t; });
  if (it == row.end() || it->target != target) return nullptr;
  return &it->stats;
}

const ArcStats* WindowGraph::find(const VertexId& source, const VertexId& target) const {
  auto s = index_of(source);
  auto t = index_of(target);
  if (!s || !t) return nullptr;
  return find(*s, *t);
}

namespace {

void merge_call(ArcStats& s, Timestamp t, std::int64_t duration) {
  if (s.call_count == 0) {
    s.first_call = s.last_call = t;
  } else {
    s.first_call = std::min(s.first_call, t);
    s.last_call = std::max(s.last_call, t);
  }
  ++s.call_count;
  s.total_duration += duration;
}

std::uint64_t pair_key(VertexIndex s, VertexIndex t) {
  return (static_cast<std::uint64_t>(s) << 32) | t;
}

// Builds a graph from arcs keyed by endpoint names; names are re-indexed so
// only endpoints of surviving arcs remain.
template <typename ArcRange, typename NameOf>
WindowGraph reindex(TimeWindow window, const ArcRange& arcs, NameOf name_of) {
  std::vector<std::string_view> ends;
  ends.reserve(2 * arcs.size());
  for (const auto& a : arcs) {
    ends.push_back(name_of(a.source));
    ends.push_back(name_of(a.target));
  }
  std::sort(ends.begin(), ends.end());
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
  std::unordered_map<std::string_view, VertexIndex> idx;
  idx.reserve(ends.size());
  std::vector<VertexId> names;
  names.reserve(ends.size());
  for (VertexIndex v = 0; v < ends.size(); ++v) {
    idx.emplace(ends[v], v);
    names.emplace_back(ends[v]);
  }
  std::vector<Arc> out;
  out.reserve(arcs.size());
  for (const auto& a : arcs) {
    out.push_back(Arc{idx.at(name_of(a.source)), idx.at(name_of(a.target)), a.stats});
  }
  std::sort(out.begin(), out.end(), [](const Arc& x, const Arc& y) {
    return std::tie(x.source, x.target) < std::tie(y.source, y.target);
  });
  return WindowGraph(window, std::move(names), std::move(out));
}

}  // namespace

WindowGraph build_window_graph(std::span<const CallRecord> records, TimeWindow window) {
  std::vector<std::string_view> ends;
  for (const auto& r : records) {
    if (!window.contains(r.timestamp)) continue;
    ends.push_back(r.caller);
    ends.push_back(r.callee);
  }
  std::sort(ends.begin(), ends.end());
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
  std::unordered_map<std::string_view, VertexIndex> idx;
  idx.reserve(ends.size());
  for (VertexIndex v = 0; v < ends.size(); ++v) idx.emplace(ends[v], v);

  std::unordered_map<std::uint64_t, ArcStats> agg;
  for (const auto& r : records) {
    if (!window.contains(r.timestamp) || r.caller == r.callee) continue;
    merge_call(agg[pair_key(idx.at(r.caller), idx.at(r.callee))], r.timestamp, r.duration);
  }
  std::vector<Arc> arcs;
  arcs.reserve(agg.size());
  for (const auto& [key, stats] : agg) {
    arcs.push_back(Arc{static_cast<VertexIndex>(key >> 32),
                       static_cast<VertexIndex>(key & 0xffffffffu), stats});
  }
  std::sort(arcs.begin(), arcs.end(), [](const Arc& x, const Arc& y) {
    return std::tie(x.source, x.target) < std::tie(y.source, y.target);
  });
  std::vector<VertexId> names(ends.begin(), ends.end());
  return WindowGraph(window, std::move(names), std::move(arcs));
}

namespace {

WindowGraph drop_flagged(const WindowGraph& g, const std::vector<bool>& drop) {
  std::vector<Arc> kept;
  kept.reserve(g.arc_count());
  for (const Arc& a : g.arcs()) {
    if (!drop[a.source] && !drop[a.target]) kept.push_back(a);
  }
  return reindex(g.window(), kept, [&](VertexIndex v) -> std::string_view { return g.name(v); });
}

}  // namespace

FilterResult apply_robot_filter(const WindowGraph& g, const RobotFilterConfig& cfg) {
  std::vector<bool> drop(g.vertex_count(), false);
  FilterResult result;
  for (VertexIndex v = 0; v < g.vertex_count(); ++v) {
    const std::size_t neighbors =
        cfg.mode == NeighborMode::out ? g.out_degree(v) : g.contacts(v).size();
    if (neighbors >= cfg.max_neighbors) {
      drop[v] = true;
      result.removed.push_back(g.name(v));
    }
  }
  result.graph = result.removed.empty() ? g : drop_flagged(g, drop);
  return result;
}

WindowGraph remove_vertices(const WindowGraph& g, std::span<const VertexId> removed) {
  std::vector<bool> drop(g.vertex_count(), false);
  bool any = false;
  for (const auto& id : removed) {
    if (auto v = g.index_of(id)) {
      drop[*v] = true;
      any = true;
    }
  }
  return any ? drop_flagged(g, drop) : g;
}

WindowPair split_windows(std::span<const CallRecord> records, const WindowConfig& cfg,
                         const RobotFilterConfig& filter) {
  cfg.validate();
  WindowPair out;
  auto filtered = apply_robot_filter(build_window_graph(records, cfg.tau1()), filter);
  out.tau1 = std::move(filtered.graph);
  out.removed = std::move(filtered.removed);
  out.tau2 = remove_vertices(build_window_graph(records, cfg.tau2()), out.removed);
  return out;
}

void write_window_graph(std::ostream& out, const WindowGraph& g) {
  out << "# window," << g.window().start << ',' << g.window().end << '\n';
  out << "i,j,count,first,last,duration\n";
  for (const Arc& a : g.arcs()) {
    out << g.name(a.source) << ',' << g.name(a.target) << ',' << a.stats.call_count << ','
        << a.stats.first_call << ',' << a.stats.last_call << ',' << a.stats.total_duration << '\n';
  }
}

void write_window_graph_file(const std::string& path, const WindowGraph& g) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write window graph: " + path);
  write_window_graph(out, g);
  if (!out) throw DataError("write failed: " + path);
}

namespace {

bool to_int(std::string_view s, std::int64_t& v) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc{} && p == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> f;
  while (true) {
    auto c = line.find(',');
    f.push_back(line.substr(0, c));
    if (c == std::string_view::npos) break;
    line.remove_prefix(c + 1);
  }
  return f;
}

struct NamedArc {
  std::string source;
  std::string target;
  ArcStats stats;
};

}  // namespace

WindowGraph read_window_graph(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw DataError("window graph line " + std::to_string(line_no) + ": " + what);
  };
  if (!std::getline(in, line)) throw DataError("window graph: empty input");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  TimeWindow window;
  {
    auto f = split(line);
    if (f.size() != 3 || f[0] != "# window" || !to_int(f[1], window.start) ||
        !to_int(f[2], window.end) || window.start >= window.end) {
      fail("expected '# window,START,END'");
    }
  }
  std::vector<NamedArc> arcs;
  std::set<std::pair<std::string, std::string>> seen;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.starts_with("i,j")) continue;
    }
    auto f = split(line);
    NamedArc a;
    if (f.size() != 6 || f[0].empty() || f[1].empty() || f[0] == f[1] ||
        !to_int(f[2], a.stats.call_count) || !to_int(f[3], a.stats.first_call) ||
        !to_int(f[4], a.stats.last_call) || !to_int(f[5], a.stats.total_duration)) {
      fail("malformed arc row");
    }
    if (a.stats.call_count < 1 || a.stats.first_call > a.stats.last_call ||
        !window.contains(a.stats.first_call) || !window.contains(a.stats.last_call)) {
      fail("arc statistics inconsistent with window");
    }
    a.source = std::string(f[0]);
    a.target = std::string(f[1]);
    if (!seen.emplace(a.source, a.target).second) fail("duplicate arc");
    arcs.push_back(std::move(a));
  }
  struct View {
    std::size_t source, target;
    ArcStats stats;
  };
  std::vector<View> views;
  views.reserve(arcs.size());
  for (std::size_t k = 0; k < arcs.size(); ++k) views.push_back({k, k, arcs[k].stats});
  // source/target carry the row index; NameOf resolves the endpoint by position.
  std::vector<std::string_view> endpoint_names;
  endpoint_names.reserve(2 * arcs.size());
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    views[k].source = endpoint_names.size();
    endpoint_names.push_back(arcs[k].source);
    views[k].target = endpoint_names.size();
    endpoint_names.push_back(arcs[k].target);
  }
  return reindex(window, views, [&](std::size_t k) { return endpoint_names[k]; });
}

WindowGraph read_window_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open window graph: " + path);
  return read_window_graph(in);
}

std::string to_string(NeighborMode m) { return m == NeighborMode::out ? "out" : "total"; }

NeighborMode parse_neighbor_mode(const std::string& s) {
  if (s == "out") return NeighborMode::out;
  if (s == "total") return NeighborMode::total;
  throw UsageError("unknown neighbor mode: " + s);
}

}  // namespace decaygraph
