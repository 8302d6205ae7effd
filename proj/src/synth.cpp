#include "decaygraph/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_set>

#include "decaygraph/errors.hpp"
#include "decaygraph/feature_io.hpp"

namespace decaygraph {

double PlantedRule::linear(const EdgeFeatureVector& x) const {
  double z = intercept;
  for (const auto& [f, beta] : coefficients) z += beta * x[f];
  return z;
}

double PlantedRule::probability(const EdgeFeatureVector& x) const {
  const double z = linear(x);
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

void SynthConfig::validate() const {
  auto prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw DataError(std::string("synth: ") + what + " must lie in [0, 1]");
  };
  if (n_vertices < 3) throw DataError("synth: need at least 3 vertices");
  if (window_seconds <= 0) throw DataError("synth: window length must be positive");
  if (max_out_degree < 1) throw DataError("synth: max_out_degree must be >= 1");
  if (max_out_degree >= 50) {
    throw DataError("synth: max_out_degree >= 50 would put generated vertices under the robot filter");
  }
  if (max_out_degree >= n_vertices) throw DataError("synth: max_out_degree must be below n_vertices");
  if (!(degree_log_sd >= 0.0) || !(rate_log_sd >= 0.0)) throw DataError("synth: negative spread");
  if (!(popularity_alpha > 0.0)) throw DataError("synth: popularity_alpha must be positive");
  if (!(mean_duration >= 0.0)) throw DataError("synth: mean_duration must be non-negative");
  if (!(new_arc_share >= 0.0)) throw DataError("synth: new_arc_share must be non-negative");
  prob(reciprocity, "reciprocity");
  prob(triadic_closure, "triadic_closure");
  prob(established_share, "established_share");
  if (rule.target_persist_share) {
    const double s = *rule.target_persist_share;
    if (!(s > 0.0 && s < 1.0)) {
      throw DataError("synth: target persist share must lie strictly inside (0, 1)");
    }
  }
}

namespace {

nlohmann::json coefficients_json(const std::map<Feature, double>& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [f, b] : c) j[std::string(feature_name(f))] = b;
  return j;
}

std::map<Feature, double> coefficients_from(const nlohmann::json& j) {
  std::map<Feature, double> out;
  for (const auto& [name, value] : j.items()) {
    auto f = parse_feature(name);
    if (!f) throw DataError("synth: unknown feature in rule: " + name);
    out[*f] = value.get<double>();
  }
  return out;
}

}  // namespace

nlohmann::json SynthConfig::to_json() const {
  nlohmann::json rule_j{{"intercept", rule.intercept},
                        {"coefficients", coefficients_json(rule.coefficients)}};
  rule_j["target_persist_share"] =
      rule.target_persist_share ? nlohmann::json(*rule.target_persist_share) : nlohmann::json();
  return {{"preset", preset},
          {"seed", seed},
          {"n_vertices", n_vertices},
          {"t0", t0},
          {"window_seconds", window_seconds},
          {"degree_log_mean", degree_log_mean},
          {"degree_log_sd", degree_log_sd},
          {"max_out_degree", max_out_degree},
          {"popularity_alpha", popularity_alpha},
          {"reciprocity", reciprocity},
          {"triadic_closure", triadic_closure},
          {"rate_log_mean", rate_log_mean},
          {"rate_log_sd", rate_log_sd},
          {"established_share", established_share},
          {"mean_duration", mean_duration},
          {"new_arc_share", new_arc_share},
          {"rule", rule_j}};
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
  try {
    SynthConfig c;
    if (j.contains("preset") && j.at("preset").is_string()) {
      const auto name = j.at("preset").get<std::string>();
      if (name != "custom") c = synth_preset(name, j.value("seed", std::uint64_t{1}));
    }
    c.seed = j.value("seed", c.seed);
    c.n_vertices = j.value("n_vertices", c.n_vertices);
    c.t0 = j.value("t0", c.t0);
    c.window_seconds = j.value("window_seconds", c.window_seconds);
    c.degree_log_mean = j.value("degree_log_mean", c.degree_log_mean);
    c.degree_log_sd = j.value("degree_log_sd", c.degree_log_sd);
    c.max_out_degree = j.value("max_out_degree", c.max_out_degree);
    c.popularity_alpha = j.value("popularity_alpha", c.popularity_alpha);
    c.reciprocity = j.value("reciprocity", c.reciprocity);
    c.triadic_closure = j.value("triadic_closure", c.triadic_closure);
    c.rate_log_mean = j.value("rate_log_mean", c.rate_log_mean);
    c.rate_log_sd = j.value("rate_log_sd", c.rate_log_sd);
    c.established_share = j.value("established_share", c.established_share);
    c.mean_duration = j.value("mean_duration", c.mean_duration);
    c.new_arc_share = j.value("new_arc_share", c.new_arc_share);
    if (j.contains("rule")) {
      const auto& r = j.at("rule");
      c.rule.intercept = r.value("intercept", c.rule.intercept);
      if (r.contains("coefficients")) c.rule.coefficients = coefficients_from(r.at("coefficients"));
      if (r.contains("target_persist_share")) {
        const auto& t = r.at("target_persist_share");
        c.rule.target_persist_share = t.is_null() ? std::nullopt : std::optional<double>(t.get<double>());
      }
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("synth config: ") + e.what());
  }
}

SynthConfig synth_preset(const std::string& name, std::uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  c.preset = name;
  if (name == "paperlike") {
    c.rule.coefficients = {{Feature::d_i, -0.10}, {Feature::c_ij, 0.35}, {Feature::c_ji, 0.20},
                           {Feature::cn, 0.10},   {Feature::fdate, -1.5}, {Feature::edate, 2.0}};
    c.rule.target_persist_share = 0.57;
    return c;
  }
  if (name == "cij-steep") {
    c.n_vertices = 25600;
    c.rule.coefficients = {{Feature::c_ij, 3.0}};
    c.rule.intercept = -7.5;  // boundary between 2 and 3 calls
    return c;
  }
  throw UsageError("unknown synth preset: " + name);
}

namespace {

class Random {
 public:
  explicit Random(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = rng_();
    } while (x >= limit);
    return x % bound;
  }

  bool chance(double p) { return uniform() < p; }

  double normal() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    cached_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  double lognormal(double mu, double sd) { return std::exp(mu + sd * normal()); }

  double exponential(double mean) {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return -mean * std::log(u);
  }

  // Knuth's product method on chunks of rate <= 20.
  std::int64_t poisson(double lambda) {
    std::int64_t total = 0;
    while (lambda > 0.0) {
      const double chunk = std::min(lambda, 20.0);
      lambda -= chunk;
      const double limit = std::exp(-chunk);
      double p = uniform();
      while (p > limit) {
        ++total;
        p *= uniform();
      }
    }
    return total;
  }

 private:
  std::mt19937_64 rng_;
  bool cached_ = false;
  double spare_ = 0.0;
};

std::string vertex_name(std::size_t v) {
  std::string digits = std::to_string(v);
  return "v" + std::string(digits.size() < 7 ? 7 - digits.size() : 0, '0') + digits;
}

struct ArcPlan {
  std::uint32_t source;
  std::uint32_t target;
  double rate;
};

std::uint64_t key(std::uint32_t a, std::uint32_t b) { return (std::uint64_t{a} << 32) | b; }

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

}  // namespace

double average_clustering(const WindowGraph& g) {
  double sum = 0.0;
  std::size_t counted = 0;
  for (VertexIndex v = 0; v < g.vertex_count(); ++v) {
    const auto nb = g.contacts(v);
    if (nb.size() < 2) continue;
    std::size_t links = 0;
    for (std::size_t a = 0; a < nb.size(); ++a) {
      const auto na = g.contacts(nb[a]);
      for (std::size_t b = a + 1; b < nb.size(); ++b) {
        if (std::binary_search(na.begin(), na.end(), nb[b])) ++links;
      }
    }
    const double pairs = 0.5 * static_cast<double>(nb.size()) * static_cast<double>(nb.size() - 1);
    sum += static_cast<double>(links) / pairs;
    ++counted;
  }
  return counted ? sum / static_cast<double>(counted) : 0.0;
}

double bayes_rate(std::span<const TruthEdge> edges) {
  if (edges.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& e : edges) acc += std::max(e.persist_probability, 1.0 - e.persist_probability);
  return acc / static_cast<double>(edges.size());
}

SynthCorpus generate(const SynthConfig& cfg) {
  cfg.validate();
  Random rng(cfg.seed);
  const std::size_t n = cfg.n_vertices;
  const double window = static_cast<double>(cfg.window_seconds);

  // Popularity weights for target choice, as a cumulative table.
  std::vector<double> cumulative(n);
  {
    double acc = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      double u;
      do {
        u = rng.uniform();
      } while (u <= 0.0);
      acc += std::pow(u, -1.0 / cfg.popularity_alpha);
      cumulative[v] = acc;
    }
  }
  auto popular_vertex = [&]() {
    const double x = rng.uniform() * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
    return static_cast<std::uint32_t>(std::min<std::size_t>(it - cumulative.begin(), n - 1));
  };

  std::vector<std::vector<std::uint32_t>> outs(n), ins(n);
  std::unordered_set<std::uint64_t> present;
  auto add_arc = [&](std::uint32_t a, std::uint32_t b) {
    outs[a].push_back(b);
    ins[b].push_back(a);
    present.insert(key(a, b));
  };
  auto random_contact = [&](std::uint32_t v) -> std::optional<std::uint32_t> {
    const std::size_t total = outs[v].size() + ins[v].size();
    if (total == 0) return std::nullopt;
    const std::size_t k = rng.below(total);
    return k < outs[v].size() ? outs[v][k] : ins[v][k - outs[v].size()];
  };

  for (std::uint32_t i = 0; i < n; ++i) {
    const double draw = rng.lognormal(cfg.degree_log_mean, cfg.degree_log_sd);
    const auto want = static_cast<std::size_t>(
        std::clamp<double>(std::round(draw), 1.0, static_cast<double>(cfg.max_out_degree)));
    std::size_t attempts = 0;
    while (outs[i].size() < want && attempts++ < 50 * want) {
      std::uint32_t cand;
      std::optional<std::uint32_t> via;
      if (rng.chance(cfg.triadic_closure) && (via = random_contact(i))) {
        auto second = random_contact(*via);
        if (!second) continue;
        cand = *second;
      } else {
        cand = popular_vertex();
      }
      if (cand == i || present.contains(key(i, cand)) || present.contains(key(cand, i))) continue;
      add_arc(i, cand);
      if (rng.chance(cfg.reciprocity) && outs[cand].size() < cfg.max_out_degree &&
          !present.contains(key(cand, i))) {
        add_arc(cand, i);
      }
    }
  }

  // One strength per unordered dyad, perturbed per direction.
  std::unordered_map<std::uint64_t, double> dyad_strength;
  std::vector<ArcPlan> plans;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j : outs[i]) {
      const auto dk = key(std::min(i, j), std::max(i, j));
      auto it = dyad_strength.find(dk);
      if (it == dyad_strength.end()) {
        it = dyad_strength.emplace(dk, rng.lognormal(cfg.rate_log_mean, cfg.rate_log_sd)).first;
      }
      const double rate = std::min(200.0, it->second * std::exp(0.5 * rng.normal()));
      plans.push_back({i, j, rate});
    }
  }

  std::vector<std::string> names(n);
  for (std::size_t v = 0; v < n; ++v) names[v] = vertex_name(v);

  SynthCorpus corpus;
  corpus.config = cfg;
  auto& records = corpus.records;
  auto emit = [&](std::uint32_t a, std::uint32_t b, double offset) {
    CallRecord r;
    r.caller = names[a];
    r.callee = names[b];
    r.timestamp = cfg.t0 + static_cast<Timestamp>(offset);
    r.duration = static_cast<std::int64_t>(std::llround(rng.exponential(cfg.mean_duration)));
    r.call_type = CallType::voice;
    records.push_back(std::move(r));
  };

  for (const auto& p : plans) {
    const double birth = rng.chance(cfg.established_share) ? 0.0 : rng.uniform() * window;
    const double exposure = (window - birth) / window;
    const std::int64_t calls = 1 + rng.poisson(p.rate * exposure);
    for (std::int64_t c = 0; c < calls; ++c) {
      emit(p.source, p.target, std::min(window - 1.0, birth + rng.uniform() * (window - birth)));
    }
  }

  const WindowConfig wc = cfg.windows();
  const WindowGraph tau1 = build_window_graph(records, wc.tau1());

  std::vector<EdgeFeatureVector> features;
  features.reserve(tau1.arc_count());
  for (const Arc& a : tau1.arcs()) features.push_back(edge_features(tau1, a.source, a.target));
  if (features.empty()) throw DataError("synth: generated graph has no arcs");

  PlantedRule rule = cfg.rule;
  if (rule.target_persist_share) {
    std::vector<double> base(features.size());
    for (std::size_t k = 0; k < features.size(); ++k) {
      base[k] = rule.linear(features[k]) - rule.intercept;
    }
    auto share = [&](double b) {
      double acc = 0.0;
      for (double z : base) {
        const double t = b + z;
        acc += t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
      }
      return acc / static_cast<double>(base.size());
    };
    double lo = -60.0, hi = 60.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (share(mid) < *rule.target_persist_share ? lo : hi) = mid;
    }
    rule.intercept = 0.5 * (lo + hi);
    if (std::abs(share(rule.intercept) - *rule.target_persist_share) > 1e-3) {
      throw DataError("synth: target persist share unreachable with these coefficients");
    }
  }
  corpus.intercept = rule.intercept;

  // Map tau1 arcs back to plans for their rates.
  std::unordered_map<std::uint64_t, double> rate_of;
  rate_of.reserve(plans.size());
  for (const auto& p : plans) rate_of.emplace(key(p.source, p.target), p.rate);

  std::size_t persisted = 0;
  corpus.truth.reserve(features.size());
  for (std::size_t k = 0; k < features.size(); ++k) {
    const Arc& a = tau1.arcs()[k];
    const double prob = rule.probability(features[k]);
    const int label = rng.chance(prob) ? 1 : 0;
    corpus.truth.push_back({tau1.name(a.source), tau1.name(a.target), prob, label});
    if (!label) continue;
    ++persisted;
    // vertex names encode the generator index
    const auto s = static_cast<std::uint32_t>(std::stoul(tau1.name(a.source).substr(1)));
    const auto t = static_cast<std::uint32_t>(std::stoul(tau1.name(a.target).substr(1)));
    const std::int64_t calls = 1 + rng.poisson(rate_of.at(key(s, t)));
    for (std::int64_t c = 0; c < calls; ++c) emit(s, t, window + rng.uniform() * (window - 1.0));
  }

  const auto new_arcs = static_cast<std::size_t>(cfg.new_arc_share * static_cast<double>(plans.size()));
  for (std::size_t k = 0, attempts = 0; k < new_arcs && attempts < 20 * new_arcs + 100; ++attempts) {
    const auto s = static_cast<std::uint32_t>(rng.below(n));
    const auto t = popular_vertex();
    if (s == t || present.contains(key(s, t))) continue;
    present.insert(key(s, t));
    const std::int64_t calls = 1 + rng.poisson(rng.lognormal(cfg.rate_log_mean, cfg.rate_log_sd));
    for (std::int64_t c = 0; c < calls; ++c) emit(s, t, window + rng.uniform() * (window - 1.0));
    ++k;
  }

  std::stable_sort(records.begin(), records.end(), [](const CallRecord& a, const CallRecord& b) {
    return std::tie(a.timestamp, a.caller, a.callee) < std::tie(b.timestamp, b.caller, b.callee);
  });

  auto& st = corpus.stats;
  st.vertices = tau1.vertex_count();
  st.arcs = tau1.arc_count();
  st.records = records.size();
  st.persist_share = static_cast<double>(persisted) / static_cast<double>(features.size());
  std::vector<double> degrees;
  for (VertexIndex v = 0; v < tau1.vertex_count(); ++v) {
    if (tau1.out_degree(v) > 0) degrees.push_back(static_cast<double>(tau1.out_degree(v)));
  }
  st.mean_out_degree = std::accumulate(degrees.begin(), degrees.end(), 0.0) /
                       static_cast<double>(std::max<std::size_t>(1, degrees.size()));
  st.median_out_degree = median_of(degrees);
  st.clustering = average_clustering(tau1);
  st.bayes_rate = bayes_rate(corpus.truth);
  return corpus;
}

nlohmann::json SynthCorpus::truth_json() const {
  const auto wc = config.windows();
  return {{"generator", "decaygraph-synth"},
          {"schema_version", 1},
          {"preset", config.preset},
          {"seed", config.seed},
          {"windows", {{"t0", wc.t0}, {"delta1", wc.delta1}, {"delta2", wc.delta2}}},
          {"rule", {{"intercept", intercept}, {"coefficients", coefficients_json(config.rule.coefficients)}}},
          {"config", config.to_json()},
          {"stats",
           {{"vertices", stats.vertices},
            {"arcs", stats.arcs},
            {"records", stats.records},
            {"persist_share", stats.persist_share},
            {"median_out_degree", stats.median_out_degree},
            {"mean_out_degree", stats.mean_out_degree},
            {"clustering", stats.clustering},
            {"bayes_rate", stats.bayes_rate}}},
          {"edges_file", "truth_edges.csv"}};
}

void write_corpus(const SynthCorpus& corpus, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_records_file((base / "records.csv").string(), corpus.records);
  {
    std::ofstream out(base / "truth.json");
    if (!out) throw DataError("cannot write truth.json in " + dir);
    out << corpus.truth_json().dump(2) << '\n';
  }
  std::ofstream edges(base / "truth_edges.csv");
  if (!edges) throw DataError("cannot write truth_edges.csv in " + dir);
  edges << "source,target,p_persist,class\n";
  for (const auto& e : corpus.truth) {
    edges << e.source << ',' << e.target << ',' << format_double(e.persist_probability) << ','
          << e.label << '\n';
  }
}

TruthReport describe_truth(const nlohmann::json& truth) {
  if (!truth.is_object() || truth.value("generator", std::string{}) != "decaygraph-synth") {
    throw DataError("truth file was not produced by the synthetic generator");
  }
  try {
    TruthReport r;
    r.preset = truth.at("preset").get<std::string>();
    r.seed = truth.at("seed").get<std::uint64_t>();
    const auto& w = truth.at("windows");
    r.windows = {w.at("t0").get<Timestamp>(), w.at("delta1").get<std::int64_t>(),
                 w.at("delta2").get<std::int64_t>()};
    r.intercept = truth.at("rule").at("intercept").get<double>();
    r.coefficients = coefficients_from(truth.at("rule").at("coefficients"));
    r.config = SynthConfig::from_json(truth.at("config"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("truth file: ") + e.what());
  }
}

TruthReport describe_truth_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open truth file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception&) {
    throw DataError("truth file is not JSON: " + path);
  }
  return describe_truth(j);
}

}  // namespace decaygraph
