#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "decaygraph/edge_features.hpp"
#include "decaygraph/records.hpp"

namespace decaygraph::fixtures {

inline std::string vid(int k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "u%03d", k);
  return buf;
}

inline CallRecord call(std::string a, std::string b, Timestamp t, std::int64_t duration = 60) {
  return {std::move(a), std::move(b), t, duration, CallType::voice};
}

// Random calls among n vertices, timestamps uniform in [start, end).
inline std::vector<CallRecord> random_calls(std::mt19937_64& rng, int n, int calls, Timestamp start,
                                            Timestamp end) {
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::uniform_int_distribution<Timestamp> when(start, end - 1);
  std::uniform_int_distribution<int> dur(0, 600);
  std::vector<CallRecord> out;
  while (static_cast<int>(out.size()) < calls) {
    const int a = pick(rng);
    const int b = pick(rng);
    if (a == b) continue;
    out.push_back(call(vid(a), vid(b), when(rng), dur(rng)));
  }
  return out;
}

// Straight-from-the-records feature computation, one map lookup at a time.
class BruteForceFeatures {
 public:
  BruteForceFeatures(const std::vector<CallRecord>& records, Timestamp start, Timestamp end)
      : start_(start), end_(end) {
    for (const auto& r : records) {
      if (r.timestamp < start || r.timestamp >= end) continue;
      auto& c = calls_[{r.caller, r.callee}];
      c.push_back(r.timestamp);
      vertices_.insert(r.caller);
      vertices_.insert(r.callee);
    }
  }

  std::vector<std::pair<std::string, std::string>> arcs() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [k, v] : calls_) out.push_back(k);
    return out;
  }

  bool has_arc(const std::string& a, const std::string& b) const { return calls_.count({a, b}) > 0; }

  std::int64_t count(const std::string& a, const std::string& b) const {
    auto it = calls_.find({a, b});
    return it == calls_.end() ? 0 : static_cast<std::int64_t>(it->second.size());
  }

  std::int64_t out_degree(const std::string& v) const {
    std::int64_t d = 0;
    for (const auto& u : vertices_) d += has_arc(v, u) ? 1 : 0;
    return d;
  }

  std::int64_t out_calls(const std::string& v) const {
    std::int64_t c = 0;
    for (const auto& u : vertices_) c += count(v, u);
    return c;
  }

  std::set<std::string> contacts(const std::string& v, const std::string& i, const std::string& j) const {
    std::set<std::string> out;
    for (const auto& u : vertices_) {
      if (u == v || u == i || u == j) continue;
      if (has_arc(v, u) || has_arc(u, v)) out.insert(u);
    }
    return out;
  }

  EdgeFeatureVector features(const std::string& i, const std::string& j, InjnMode mode) const {
    EdgeFeatureVector f;
    f.d_i = out_degree(i);
    f.d_j = out_degree(j);
    f.c_i = out_calls(i);
    f.c_j = out_calls(j);
    f.c_ij = count(i, j);
    f.c_ji = count(j, i);
    f.p_ij = static_cast<double>(f.c_ij) / static_cast<double>(f.c_i);
    f.p_ji = f.c_j == 0 ? 0.0 : static_cast<double>(f.c_ji) / static_cast<double>(f.c_j);
    const auto ni = contacts(i, i, j);
    const auto nj = contacts(j, i, j);
    for (const auto& v : ni) f.cn += nj.count(v);
    for (const auto& v : ni) f.in_ += has_arc(v, j) ? 1 : 0;
    for (const auto& v : nj) f.jn += has_arc(v, i) ? 1 : 0;
    for (const auto& u : ni) {
      for (const auto& v : nj) {
        f.injn += mode == InjnMode::arcs ? (has_arc(u, v) ? 1 : 0) : count(u, v);
      }
    }
    for (const auto& u : nj) {
      for (const auto& v : ni) {
        f.jnin += mode == InjnMode::arcs ? (has_arc(u, v) ? 1 : 0) : count(u, v);
      }
    }
    const auto& ts = calls_.at({i, j});
    const double len = static_cast<double>(end_ - start_);
    f.fdate = static_cast<double>(*std::min_element(ts.begin(), ts.end()) - start_) / len;
    f.edate = static_cast<double>(*std::max_element(ts.begin(), ts.end()) - start_) / len;
    return f;
  }

 private:
  Timestamp start_, end_;
  std::map<std::pair<std::string, std::string>, std::vector<Timestamp>> calls_;
  std::set<std::string> vertices_;
};

}  // namespace decaygraph::fixtures

namespace decaygraph::fixtures {

// Two-feature toy set on a 50x50 lattice over [0,10]x[0,20]; class 1 (square)
// iff x > 5 and y > 10.
struct ToyData {
  std::vector<double> x, y;
  std::vector<int> label;
};

inline int toy_class(double x, double y) { return x > 5 && y > 10 ? 1 : 0; }

inline ToyData toy_grid() {
  ToyData d;
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 50; ++j) {
      d.x.push_back((i + 0.5) * 0.2);
      d.y.push_back((j + 0.5) * 0.4);
      d.label.push_back(toy_class(d.x.back(), d.y.back()));
    }
  }
  return d;
}

}  // namespace decaygraph::fixtures
