#include "decaygraph/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "decaygraph/errors.hpp"

namespace decaygraph {

void SplitConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("split: train fraction must lie in (0, 1)");
  }
}

namespace {

// Uniform integer in [0, bound) by rejection; std distributions are not
// specified bit-for-bit across standard libraries.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_below(rng, i)]);
  }
}

void choose(std::vector<std::size_t> pool, double fraction, std::mt19937_64& rng,
            std::vector<bool>& mask) {
  const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool.size())));
  shuffle(pool, rng);
  for (std::size_t k = 0; k < take && k < pool.size(); ++k) mask[pool[k]] = true;
}

}  // namespace

std::vector<bool> split_mask(std::span<const int> labels, const SplitConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::vector<bool> mask(labels.size(), false);
  if (cfg.stratify) {
    for (int cls : {1, 0}) {
      std::vector<std::size_t> pool;
      for (std::size_t k = 0; k < labels.size(); ++k) {
        if (labels[k] == cls) pool.push_back(k);
      }
      choose(std::move(pool), cfg.train_fraction, rng, mask);
    }
  } else {
    std::vector<std::size_t> pool(labels.size());
    std::iota(pool.begin(), pool.end(), 0);
    choose(std::move(pool), cfg.train_fraction, rng, mask);
  }
  return mask;
}

SplitResult split(std::span<const LabeledEdge> edges, const SplitConfig& cfg) {
  if (edges.size() < 2) throw DataError("split: need at least two edges");
  std::vector<int> labels;
  labels.reserve(edges.size());
  for (const auto& e : edges) labels.push_back(e.label);
  const auto mask = split_mask(labels, cfg);
  SplitResult out;
  for (std::size_t k = 0; k < edges.size(); ++k) (mask[k] ? out.train : out.test).push_back(edges[k]);
  return out;
}

double f_measure(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

ClassMetrics class_metrics(std::int64_t tp, std::int64_t fp, std::int64_t tn, std::int64_t fn) {
  ClassMetrics m;
  const auto n = tp + fp + tn + fn;
  m.accuracy = n > 0 ? static_cast<double>(tp + tn) / static_cast<double>(n) : 0.0;
  m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f_measure = f_measure(m.precision, m.recall);
  return m;
}

EvalReport evaluate(std::span<const int> predicted, std::span<const int> truth, std::string model) {
  if (predicted.size() != truth.size()) throw DataError("evaluate: length mismatch");
  if (predicted.empty()) throw DataError("evaluate: empty input");
  EvalReport r;
  r.model = std::move(model);
  auto& c = r.confusion;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const bool p = predicted[k] != 0;
    const bool t = truth[k] != 0;
    if (p && t) ++c.tp;
    else if (p && !t) ++c.fp;
    else if (!p && !t) ++c.tn;
    else ++c.fn;
  }
  r.persist = class_metrics(c.tp, c.fp, c.tn, c.fn);
  r.decay = class_metrics(c.tn, c.fn, c.tp, c.fp);
  auto note = [&](const char* cls, std::int64_t tp, std::int64_t fp, std::int64_t fn) {
    if (tp + fp == 0) r.warnings.push_back(std::string(cls) + ": no predictions, precision set to 0");
    if (tp + fn == 0) r.warnings.push_back(std::string(cls) + ": no true instances, recall set to 0");
  };
  note("persist", c.tp, c.fp, c.fn);
  note("decay", c.tn, c.fn, c.fp);
  return r;
}

namespace {

nlohmann::json metrics_json(const ClassMetrics& m) {
  return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
          {"f_measure", m.f_measure}};
}

ClassMetrics metrics_from(const nlohmann::json& j) {
  return {j.at("accuracy").get<double>(), j.at("precision").get<double>(),
          j.at("recall").get<double>(), j.at("f_measure").get<double>()};
}

}  // namespace

nlohmann::json EvalReport::to_json() const {
  return {{"model", model},
          {"confusion", {{"tp", confusion.tp}, {"fp", confusion.fp}, {"tn", confusion.tn},
                         {"fn", confusion.fn}}},
          {"persist", metrics_json(persist)},
          {"decay", metrics_json(decay)},
          {"warnings", warnings}};
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  try {
    EvalReport r;
    r.model = j.at("model").get<std::string>();
    const auto& c = j.at("confusion");
    r.confusion = {c.at("tp").get<std::int64_t>(), c.at("fp").get<std::int64_t>(),
                   c.at("tn").get<std::int64_t>(), c.at("fn").get<std::int64_t>()};
    r.persist = metrics_from(j.at("persist"));
    r.decay = metrics_from(j.at("decay"));
    r.warnings = j.value("warnings", std::vector<std::string>{});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report: ") + e.what());
  }
}

std::string compare(std::span<const EvalReport> reports) {
  if (reports.empty()) throw UsageError("compare: need at least one report");
  std::string out;
  char buf[64];
  auto cell = [&](const std::string& s, int width) {
    std::snprintf(buf, sizeof buf, "%-*s", width, s.c_str());
    out += buf;
  };
  cell("", 11);
  for (const auto& r : reports) {
    cell(r.model + "/persist", 18);
    cell(r.model + "/decay", 18);
  }
  out += '\n';
  const std::pair<const char*, double ClassMetrics::*> rows[] = {
      {"Accuracy", &ClassMetrics::accuracy},
      {"Precision", &ClassMetrics::precision},
      {"Recall", &ClassMetrics::recall},
      {"F", &ClassMetrics::f_measure}};
  for (const auto& [label, member] : rows) {
    cell(label, 11);
    for (const auto& r : reports) {
      std::snprintf(buf, sizeof buf, "%.3f", r.persist.*member);
      cell(buf, 18);
      std::snprintf(buf, sizeof buf, "%.3f", r.decay.*member);
      cell(buf, 18);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json compare_json(std::span<const EvalReport> reports) {
  if (reports.empty()) throw UsageError("compare: need at least one report");
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& r : reports) {
    cols.push_back({{"model", r.model}, {"class", "persist"}, {"metrics", metrics_json(r.persist)}});
    cols.push_back({{"model", r.model}, {"class", "decay"}, {"metrics", metrics_json(r.decay)}});
  }
  return {{"columns", cols}};
}

}  // namespace decaygraph
