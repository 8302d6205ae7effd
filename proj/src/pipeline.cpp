#include "decaygraph/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "decaygraph/errors.hpp"
#include "decaygraph/feature_io.hpp"
#include "decaygraph/hash.hpp"

namespace fs = std::filesystem;

namespace decaygraph {

// ---- renderings -----------------------------------------------------------

nlohmann::json ingest_report_json(const IngestReport& r) {
  return {{"total_rows", r.total_rows},
          {"accepted", r.accepted},
          {"skipped", r.skipped()},
          {"malformed", r.malformed},
          {"skipped_detail",
           {{"self_calls", r.self_calls},
            {"filtered_type", r.filtered_type},
            {"out_of_horizon", r.out_of_horizon},
            {"below_min_duration", r.below_min_duration},
            {"out_of_network", r.out_of_network}}}};
}

nlohmann::json summary_json(const FeatureSummary& s) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const auto& c = s.columns[f];
    features.push_back({{"feature", kFeatureNames[f]},
                        {"min", c.min},
                        {"max", c.max},
                        {"median", c.median},
                        {"mean", c.mean},
                        {"distinct_values", c.cdf.size()}});
  }
  return {{"edges", s.count}, {"median_convention", "lower"}, {"features", features}};
}

namespace {

nlohmann::json descriptor_json(const PartitionDescriptor& d) {
  nlohmann::json j{{"kind", to_string(d.kind)}, {"buckets", d.bucket_count()}};
  if (d.kind == DiscretizationKind::categorical) {
    j["categories"] = d.categories.size();
  } else {
    j["thresholds"] = d.thresholds;
  }
  return j;
}

}  // namespace

nlohmann::json ranking_json(const FeatureRanking& r) {
  nlohmann::json entries = nlohmann::json::array();
  std::size_t rank = 1;
  for (const auto& e : r.entries) {
    entries.push_back({{"rank", rank++},
                       {"feature", feature_name(e.feature)},
                       {"gain", e.gain},
                       {"discretization", descriptor_json(e.partition)}});
  }
  nlohmann::json disc{{"kind", to_string(r.discretization.kind)}};
  if (r.discretization.kind == DiscretizationKind::equal_frequency) {
    disc["bins"] = r.discretization.bins;
  }
  return {{"mode", to_string(r.mode)}, {"discretization", disc}, {"ranking", entries}};
}

std::string correlation_csv(const CorrelationMatrix& m) {
  std::string out = "feature";
  for (auto name : kFeatureNames) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (std::size_t a = 0; a < kFeatureCount; ++a) {
    out += kFeatureNames[a];
    for (std::size_t b = 0; b < kFeatureCount; ++b) {
      out += ',';
      out += m.rho[a][b] ? format_double(*m.rho[a][b]) : "NA";
    }
    out += '\n';
  }
  return out;
}

std::string odds_table(const LogitModel& m) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-8s %12s %12s\n", "feature", "beta", "exp(beta)");
  out += buf;
  std::snprintf(buf, sizeof buf, "%-8s %12.4f %12s\n", "(const)", m.intercept, "");
  out += buf;
  for (const auto& row : report_odds(m)) {
    std::snprintf(buf, sizeof buf, "%-8s %12.4f %12.4f\n", row.feature.c_str(), row.beta, row.odds);
    out += buf;
  }
  return out;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("write failed: " + path);
}

namespace {

void write_json(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace

Model load_model(const std::string& path) {
  const auto j = read_json_file(path);
  const auto kind = j.value("model", std::string{});
  if (kind == "tree") return DecisionTree::from_json(j);
  if (kind == "logit") return LogitModel::from_json(j);
  throw DataError(path + ": unknown model kind");
}

void save_model(const Model& m, const std::string& path) {
  std::visit([&](const auto& model) { write_json(path, model.to_json()); }, m);
}

std::string model_kind(const Model& m) {
  return std::holds_alternative<DecisionTree>(m) ? "tree" : "logit";
}

std::vector<int> predict_labels(const Model& m, std::span<const LabeledEdge> edges,
                                double threshold) {
  std::vector<int> out;
  out.reserve(edges.size());
  for (const auto& e : edges) {
    const auto x = e.features.values();
    if (const auto* tree = std::get_if<DecisionTree>(&m)) {
      out.push_back(tree->predict(std::span<const double>(x)).label);
    } else {
      out.push_back(std::get<LogitModel>(m).predict_class(x, threshold));
    }
  }
  return out;
}

// ---- stages ----------------------------------------------------------------

IngestReport ingest_stage(const std::string& input, const IngestConfig& cfg,
                          const std::string& records_out, const std::string& report_out) {
  auto result = parse_records_file(input, cfg);
  write_records_file(records_out, result.records);
  if (!report_out.empty()) write_json(report_out, ingest_report_json(result.report));
  return result.report;
}

WindowPair build_stage(const std::string& records, const WindowConfig& wc,
                       const RobotFilterConfig& filter, const std::string& out_dir) {
  const auto recs = read_records_file(records);
  auto pair = split_windows(recs, wc, filter);
  fs::create_directories(out_dir);
  const fs::path base(out_dir);
  write_window_graph_file((base / "tau1.csv").string(), pair.tau1);
  write_window_graph_file((base / "tau2.csv").string(), pair.tau2);
  write_json((base / "robots.json").string(),
             {{"max_neighbors", filter.max_neighbors},
              {"neighbor_mode", to_string(filter.mode)},
              {"removed", pair.removed}});
  return pair;
}

std::vector<LabeledEdge> features_stage(const std::string& tau1, const std::string& tau2,
                                        const FeatureOptions& opts, const std::string& out) {
  const auto g1 = read_window_graph_file(tau1);
  const auto g2 = read_window_graph_file(tau2);
  auto edges = label_edges(g1, g2, opts);
  write_features_file(out, edges);
  return edges;
}

FeatureSummary summarize_stage(const std::string& features, const std::string& out,
                               const std::optional<std::string>& cdf_dir) {
  const auto edges = read_features_file(features);
  const auto summary = summarize(edges);
  write_json(out, summary_json(summary));
  if (cdf_dir) {
    fs::create_directories(*cdf_dir);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      std::string text = "value,cumulative\n";
      for (const auto& p : summary.columns[f].cdf) {
        text += format_double(p.value) + "," + format_double(p.cumulative) + "\n";
      }
      write_text_file((fs::path(*cdf_dir) / (std::string(kFeatureNames[f]) + ".csv")).string(), text);
    }
  }
  return summary;
}

CorrelationMatrix correlate_stage(const std::string& features, const std::string& out) {
  const auto edges = read_features_file(features);
  auto m = spearman_matrix(FeatureMatrix(edges));
  write_text_file(out, correlation_csv(m));
  return m;
}

FeatureRanking rank_stage(const std::string& features, GainMode mode, const Discretization& how,
                          const std::string& out) {
  const auto edges = read_features_file(features);
  auto r = rank_features(FeatureMatrix(edges), mode, how);
  write_json(out, ranking_json(r));
  return r;
}

SplitResult split_stage(const std::string& features, const SplitConfig& cfg,
                        const std::string& train_out, const std::string& test_out) {
  const auto edges = read_features_file(features);
  auto s = split(edges, cfg);
  write_features_file(train_out, s.train);
  write_features_file(test_out, s.test);
  return s;
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "tree") return ModelKind::tree;
  if (s == "logit") return ModelKind::logit;
  throw UsageError("unknown model kind: " + s);
}

Model train_stage(ModelKind kind, const std::string& features, const TreeConfig& tree_cfg,
                  const LogitConfig& logit_cfg, const std::string& out) {
  const auto edges = read_features_file(features);
  const FeatureMatrix m(edges);
  Model model = kind == ModelKind::tree ? Model(train_tree(m, tree_cfg))
                                        : Model(train_logit(m, logit_cfg));
  save_model(model, out);
  return model;
}

EvalReport evaluate_stage(const std::string& model_path, const std::string& features,
                          const std::string& out, double threshold) {
  const auto model = load_model(model_path);
  const auto edges = read_features_file(features);
  std::vector<int> truth;
  truth.reserve(edges.size());
  for (const auto& e : edges) truth.push_back(e.label);
  auto report = evaluate(predict_labels(model, edges, threshold), truth, model_kind(model));
  if (!out.empty()) write_json(out, report.to_json());
  return report;
}

// ---- manifest --------------------------------------------------------------

namespace {

nlohmann::json record_json(const StageRecord& s) {
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& o : s.outputs) outs.push_back({{"path", o.path}, {"hash", o.hash}});
  return {{"name", s.name}, {"input_hash", s.input_hash}, {"outputs", outs}};
}

StageRecord record_from_json(const nlohmann::json& s) {
  StageRecord r;
  r.name = s.at("name").get<std::string>();
  r.input_hash = s.at("input_hash").get<std::string>();
  for (const auto& o : s.at("outputs")) {
    r.outputs.push_back({o.at("path").get<std::string>(), o.at("hash").get<std::string>()});
  }
  return r;
}

}  // namespace

nlohmann::json Manifest::to_json() const {
  nlohmann::json stages_j = nlohmann::json::array();
  for (const auto& s : stages) stages_j.push_back(record_json(s));
  nlohmann::json j{{"tool", "decaygraph"}, {"version", kVersion}, {"seed", seed}, {"stages", stages_j}};
  if (source) j["source"] = record_json(*source);
  return j;
}

Manifest Manifest::from_json(const nlohmann::json& j) {
  Manifest m;
  m.seed = j.value("seed", std::uint64_t{0});
  for (const auto& s : j.value("stages", nlohmann::json::array())) m.stages.push_back(record_from_json(s));
  if (j.contains("source")) m.source = record_from_json(j.at("source"));
  return m;
}

const StageRecord* Manifest::find(const std::string& name) const {
  if (source && source->name == name) return &*source;
  for (const auto& s : stages) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

namespace {

class StageRunner {
 public:
  StageRunner(const PipelineConfig& cfg, const Logger& log) : log_(log), base_(cfg.out_dir) {
    fs::create_directories(base_);
    const auto manifest_path = base_ / "manifest.json";
    if (cfg.resume && fs::exists(manifest_path)) {
      try {
        previous_ = Manifest::from_json(read_json_file(manifest_path.string()));
      } catch (const std::exception&) {
        previous_.reset();
      }
    }
    manifest_.seed = cfg.seed;
  }

  std::string path(const std::string& rel) const { return (base_ / rel).string(); }

  template <typename Fn>
  void run(const std::string& name, const nlohmann::json& params,
           const std::vector<std::string>& inputs, const std::vector<std::string>& outputs, Fn&& fn) {
    Fnv1a h;
    h.update(name);
    h.update(params.dump());
    for (const auto& in : inputs) {
      h.update("|");
      h.update(hash_file(in));
    }
    StageRecord rec{name, h.hex(), {}, false};

    if (const StageRecord* prev = previous_ ? previous_->find(name) : nullptr;
        prev && prev->input_hash == rec.input_hash && prev->outputs.size() == outputs.size()) {
      bool intact = true;
      for (std::size_t k = 0; k < outputs.size(); ++k) {
        intact = intact && prev->outputs[k].path == outputs[k] &&
                 hash_file(path(outputs[k])) == prev->outputs[k].hash && !prev->outputs[k].hash.empty();
      }
      if (intact) {
        rec.outputs = prev->outputs;
        rec.reused = true;
        if (log_) log_("stage " + name + ": up to date");
        keep(std::move(rec));
        return;
      }
    }

    const auto marker = base_ / (name + ".partial");
    fs::remove(marker);
    if (log_) log_("stage " + name + ": running");
    try {
      fn();
    } catch (const std::exception& e) {
      write_text_file(marker.string(), std::string(e.what()) + "\n");
      const bool data = dynamic_cast<const DataError*>(&e) != nullptr ||
                        dynamic_cast<const UsageError*>(&e) != nullptr;
      throw StageError(name, e.what(), data);
    }
    for (const auto& out : outputs) rec.outputs.push_back({out, hash_file(path(out))});
    keep(std::move(rec));
  }

  Manifest finish() {
    write_json(path("manifest.json"), manifest_.to_json());
    return manifest_;
  }

 private:
  void keep(StageRecord rec) {
    if (rec.name == "synth") {
      manifest_.source = std::move(rec);
    } else {
      manifest_.stages.push_back(std::move(rec));
    }
  }

  const Logger& log_;
  fs::path base_;
  std::optional<Manifest> previous_;
  Manifest manifest_;
};

nlohmann::json types_json(const std::set<CallType>& types) {
  nlohmann::json j = nlohmann::json::array();
  for (auto t : types) j.push_back(std::string(to_string(t)));
  return j;
}

}  // namespace

Manifest run_pipeline(const PipelineConfig& cfg, const Logger& log) {
  const bool synthetic = cfg.synth_preset || cfg.synth_config;
  if (synthetic == cfg.records.has_value()) {
    throw UsageError("run: give exactly one of --records or a synthetic preset/config");
  }
  StageRunner stages(cfg, log);

  std::string raw_records;
  bool raw_has_header = cfg.has_header;
  WindowConfig wc;
  if (synthetic) {
    SynthConfig sc = cfg.synth_config ? SynthConfig::from_json(read_json_file(*cfg.synth_config))
                                      : synth_preset(*cfg.synth_preset, cfg.seed);
    sc.seed = cfg.seed;
    if (cfg.synth_vertices) sc.n_vertices = *cfg.synth_vertices;
    wc = sc.windows();
    stages.run("synth", sc.to_json(), {}, {"synth/records.csv", "synth/truth.json", "synth/truth_edges.csv"},
               [&] { write_corpus(generate(sc), stages.path("synth")); });
    raw_records = stages.path("synth/records.csv");
    raw_has_header = true;
  } else {
    raw_records = *cfg.records;
  }
  if (cfg.t0) wc.t0 = *cfg.t0;
  if (cfg.delta1) wc.delta1 = *cfg.delta1;
  if (cfg.delta2) wc.delta2 = *cfg.delta2;
  if (!synthetic && (!cfg.t0 || !cfg.delta1 || !cfg.delta2)) {
    throw UsageError("run: --t0, --delta1 and --delta2 are required with --records");
  }
  wc.validate();

  IngestConfig ic;
  ic.horizon_start = wc.t0;
  ic.horizon_end = wc.t0 + wc.delta1 + wc.delta2;
  ic.keep_call_types = cfg.keep_call_types;
  ic.strict = cfg.strict;
  ic.has_header = raw_has_header;
  ic.min_duration = cfg.min_duration;
  std::vector<std::string> ingest_inputs{raw_records};
  if (cfg.in_network_ids) {
    ic.in_network_ids = read_id_list(*cfg.in_network_ids);
    ingest_inputs.push_back(*cfg.in_network_ids);
  }
  stages.run("ingest",
             {{"start", ic.horizon_start}, {"end", ic.horizon_end}, {"types", types_json(ic.keep_call_types)},
              {"strict", ic.strict}, {"header", ic.has_header}, {"min_duration", ic.min_duration},
              {"in_network", cfg.in_network_ids.has_value()}},
             ingest_inputs, {"records.csv", "ingest_report.json"},
             [&] { ingest_stage(raw_records, ic, stages.path("records.csv"), stages.path("ingest_report.json")); });

  stages.run("build",
             {{"t0", wc.t0}, {"delta1", wc.delta1}, {"delta2", wc.delta2},
              {"max_neighbors", cfg.filter.max_neighbors}, {"neighbor_mode", to_string(cfg.filter.mode)}},
             {stages.path("records.csv")}, {"graphs/tau1.csv", "graphs/tau2.csv", "graphs/robots.json"},
             [&] { build_stage(stages.path("records.csv"), wc, cfg.filter, stages.path("graphs")); });

  stages.run("features",
             {{"injn_mode", to_string(cfg.features.injn_mode)},
              {"persist_mode", to_string(cfg.features.persist_mode)}},
             {stages.path("graphs/tau1.csv"), stages.path("graphs/tau2.csv")}, {"features.csv"}, [&] {
               features_stage(stages.path("graphs/tau1.csv"), stages.path("graphs/tau2.csv"), cfg.features,
                              stages.path("features.csv"));
             });

  const std::string features = stages.path("features.csv");
  stages.run("correlate", nlohmann::json::object(), {features}, {"correlation.csv"},
             [&] { correlate_stage(features, stages.path("correlation.csv")); });
  stages.run("rank",
             {{"mode", to_string(cfg.gain_mode)}, {"discretization", to_string(cfg.discretization.kind)},
              {"bins", cfg.discretization.bins}},
             {features}, {"ranking.json"},
             [&] { rank_stage(features, cfg.gain_mode, cfg.discretization, stages.path("ranking.json")); });

  SplitConfig sp{cfg.train_fraction, cfg.seed, cfg.stratify};
  stages.run("split", {{"fraction", sp.train_fraction}, {"seed", sp.seed}, {"stratify", sp.stratify}},
             {features}, {"train.csv", "test.csv"},
             [&] { split_stage(features, sp, stages.path("train.csv"), stages.path("test.csv")); });

  const std::string train = stages.path("train.csv");
  const std::string test = stages.path("test.csv");
  stages.run("train",
             {{"min_leaf", cfg.tree.min_leaf_size},
              {"max_depth", cfg.tree.max_depth ? nlohmann::json(*cfg.tree.max_depth) : nlohmann::json()},
              {"min_gain", cfg.tree.min_gain}, {"max_iter", cfg.logit.max_iter},
              {"tolerance", cfg.logit.tolerance}, {"ridge", cfg.logit.ridge},
              {"standardize", cfg.logit.standardize}},
             {train}, {"model_tree.json", "model_logit.json"}, [&] {
               train_stage(ModelKind::tree, train, cfg.tree, cfg.logit, stages.path("model_tree.json"));
               train_stage(ModelKind::logit, train, cfg.tree, cfg.logit, stages.path("model_logit.json"));
             });

  stages.run("evaluate", {{"threshold", cfg.threshold}},
             {stages.path("model_tree.json"), stages.path("model_logit.json"), test},
             {"report_tree.json", "report_logit.json"}, [&] {
               evaluate_stage(stages.path("model_tree.json"), test, stages.path("report_tree.json"), cfg.threshold);
               evaluate_stage(stages.path("model_logit.json"), test, stages.path("report_logit.json"),
                              cfg.threshold);
             });

  stages.run("compare", nlohmann::json::object(),
             {stages.path("report_tree.json"), stages.path("report_logit.json")},
             {"comparison.json", "comparison.txt"}, [&] {
               std::vector<EvalReport> reports{
                   EvalReport::from_json(read_json_file(stages.path("report_tree.json"))),
                   EvalReport::from_json(read_json_file(stages.path("report_logit.json")))};
               write_json(stages.path("comparison.json"), compare_json(reports));
               write_text_file(stages.path("comparison.txt"), compare(reports));
             });

  return stages.finish();
}

}  // namespace decaygraph
