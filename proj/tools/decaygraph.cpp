#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>
#include <spdlog/sinks/stdout_color_sinks.h>

#include "decaygraph/errors.hpp"
#include "decaygraph/feature_io.hpp"
#include "decaygraph/pipeline.hpp"

using namespace decaygraph;

namespace {

std::set<CallType> call_types(const std::vector<std::string>& names) {
  std::set<CallType> out;
  for (const auto& n : names) {
    const auto t = parse_call_type(n);
    if (!t) throw UsageError("unknown call type: " + n);
    out.insert(*t);
  }
  if (out.empty()) throw UsageError("--types needs at least one call type");
  return out;
}

struct Globals {
  unsigned threads = 1;
  int verbosity = 0;
  bool quiet = false;
};

struct IngestArgs {
  std::string input, out, report;
  Timestamp start = 0, end = 0;
  std::vector<std::string> types{"voice"};
  bool strict = false, has_header = false;
  std::int64_t min_duration = 0;
  std::string in_network;
};

struct BuildArgs {
  std::string records, out;
  Timestamp t0 = 0;
  std::int64_t delta1 = 0, delta2 = 0;
  std::size_t max_neighbors = 50;
  std::string neighbor_mode = "out";
};

struct FeatureArgs {
  std::string tau1, tau2, out;
  std::string injn_mode = "arcs", persist_mode = "directed";
};

struct StatArgs {
  std::string features, out, cdf_out;
};

struct RankArgs {
  std::string features, out;
  std::string mode = "weighted", discretization = "best-binary-split";
  std::size_t bins = 4;
};

struct SplitArgs {
  std::string features, train_out, test_out;
  double fraction = 2.0 / 3.0;
  std::uint64_t seed = 1;
  bool stratify = false;
};

struct TrainArgs {
  std::string model, features, out;
  TreeConfig tree;
  std::size_t max_depth = 0;
  LogitConfig logit;
};

struct EvalArgs {
  std::string model, features, out;
  double threshold = 0.5;
};

struct CompareArgs {
  std::vector<std::string> reports;
  std::string json_out;
};

struct ModelArgs {
  std::string model;
  std::size_t max_leaves = 0;
};

struct SynthArgs {
  std::string preset, config, out;
  std::uint64_t seed = 1;
  std::size_t vertices = 0;
};

struct RunArgs {
  PipelineConfig cfg;
  std::string records, preset, synth_config, in_network;
  std::size_t vertices = 0;
  std::vector<std::string> types{"voice"};
  Timestamp t0 = 0;
  std::int64_t delta1 = 0, delta2 = 0;
  std::string neighbor_mode = "out", injn_mode = "arcs", persist_mode = "directed";
  std::string gain_mode = "weighted", discretization = "best-binary-split";
  std::size_t max_depth = 0;
};

// Fills options not given on the command line from a config file. Keys are
// long flag names, either top-level or under a [run] section.
void apply_config_file(CLI::App& cmd, const std::string& path) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = cmd.get_config_formatter()->from_file(path);
  } catch (const CLI::Error& e) {
    throw UsageError(path + ": " + e.what());
  }
  for (const auto& item : items) {
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == cmd.get_name())) {
      throw UsageError(path + ": unknown section for key " + item.fullname());
    }
    if (item.name == "++" || item.name == "--") continue;
    auto* opt = cmd.get_option_no_throw("--" + item.name);
    if (!opt || item.name == "config") throw UsageError(path + ": unknown key " + item.name);
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError(path + ": " + item.name + ": " + e.what());
    }
  }
}

void print_ranking(const FeatureRanking& r) {
  std::printf("%-5s %-8s %10s\n", "rank", "feature", "gain");
  std::size_t k = 1;
  for (const auto& e : r.entries) {
    std::printf("%-5zu %-8s %10.4f\n", k++, std::string(feature_name(e.feature)).c_str(), e.gain);
  }
}

void print_report(const EvalReport& r) {
  std::printf("model %s: accuracy %.3f\n", r.model.c_str(), r.persist.accuracy);
  std::printf("  persist: P %.3f  R %.3f  F %.3f\n", r.persist.precision, r.persist.recall,
              r.persist.f_measure);
  std::printf("  decay:   P %.3f  R %.3f  F %.3f\n", r.decay.precision, r.decay.recall,
              r.decay.f_measure);
  for (const auto& w : r.warnings) spdlog::warn("{}", w);
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("decaygraph");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");

  CLI::App app{"Edge persistence and decay analysis for call-record graphs"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Globals g;
  app.add_option("--threads", g.threads, "Worker thread cap")->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", g.verbosity, "More log output");
  app.add_flag("-q,--quiet", g.quiet, "Errors only");

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Validate and filter a raw call-record CSV");
  ingest->add_option("--input", ia.input)->required()->check(CLI::ExistingFile);
  ingest->add_option("--start", ia.start, "Horizon start (inclusive, unix seconds)")->required();
  ingest->add_option("--end", ia.end, "Horizon end (exclusive)")->required();
  ingest->add_option("--types", ia.types, "Call types to keep")->delimiter(',');
  ingest->add_flag("--strict", ia.strict, "Fail on the first malformed row");
  ingest->add_flag("--has-header", ia.has_header);
  ingest->add_option("--min-duration", ia.min_duration);
  ingest->add_option("--in-network-ids", ia.in_network)->check(CLI::ExistingFile);
  ingest->add_option("--out", ia.out, "Validated record CSV")->required();
  ingest->add_option("--report", ia.report, "IngestReport JSON (default: stdout)");

  BuildArgs ba;
  auto* build = app.add_subcommand("build", "Build the two window graphs");
  build->add_option("--records", ba.records)->required()->check(CLI::ExistingFile);
  build->add_option("--t0", ba.t0)->required();
  build->add_option("--delta1", ba.delta1)->required();
  build->add_option("--delta2", ba.delta2)->required();
  build->add_option("--max-neighbors", ba.max_neighbors, "Robot threshold")->capture_default_str();
  build->add_option("--neighbor-mode", ba.neighbor_mode)->check(CLI::IsMember({"out", "total"}));
  build->add_option("--out", ba.out, "Output directory")->required();

  FeatureArgs fa;
  auto* features = app.add_subcommand("features", "Extract labeled edge features");
  features->add_option("--tau1", fa.tau1)->required()->check(CLI::ExistingFile);
  features->add_option("--tau2", fa.tau2)->required()->check(CLI::ExistingFile);
  features->add_option("--out", fa.out)->required();
  features->add_option("--injn-mode", fa.injn_mode)->check(CLI::IsMember({"arcs", "calls"}));
  features->add_option("--persist-mode", fa.persist_mode)->check(CLI::IsMember({"directed", "either"}));

  StatArgs sa;
  auto* summarize_cmd = app.add_subcommand("summarize", "Per-feature summary statistics");
  summarize_cmd->add_option("--features", sa.features)->required()->check(CLI::ExistingFile);
  summarize_cmd->add_option("--out", sa.out)->required();
  summarize_cmd->add_option("--cdf-out", sa.cdf_out, "Directory for per-feature CDF points");

  StatArgs ca;
  auto* correlate = app.add_subcommand("correlate", "Spearman correlation matrix");
  correlate->add_option("--features", ca.features)->required()->check(CLI::ExistingFile);
  correlate->add_option("--out", ca.out)->required();

  RankArgs ra;
  auto* rank = app.add_subcommand("rank", "Rank features by information gain");
  rank->add_option("--features", ra.features)->required()->check(CLI::ExistingFile);
  rank->add_option("--mode", ra.mode)->check(CLI::IsMember({"weighted", "unweighted"}));
  rank->add_option("--discretization", ra.discretization)
      ->check(CLI::IsMember({"categorical", "best-binary-split", "equal-frequency"}));
  rank->add_option("--bins", ra.bins, "Bins for equal-frequency")->check(CLI::Range(2, 1000));
  rank->add_option("--out", ra.out)->required();

  SplitArgs spa;
  auto* split_cmd = app.add_subcommand("split", "Random train/test split of a feature file");
  split_cmd->add_option("--features", spa.features)->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--train-fraction", spa.fraction)->check(CLI::Range(0.0, 1.0));
  split_cmd->add_option("--seed", spa.seed);
  split_cmd->add_flag("--stratify", spa.stratify);
  split_cmd->add_option("--train-out", spa.train_out)->required();
  split_cmd->add_option("--test-out", spa.test_out)->required();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Fit a decision tree or logistic model");
  train->add_option("--model", ta.model)->required()->check(CLI::IsMember({"tree", "logit"}));
  train->add_option("--features", ta.features)->required()->check(CLI::ExistingFile);
  train->add_option("--out", ta.out)->required();
  train->add_option("--min-leaf", ta.tree.min_leaf_size)->capture_default_str();
  train->add_option("--max-depth", ta.max_depth, "0 = unlimited");
  train->add_option("--min-gain", ta.tree.min_gain)->capture_default_str();
  train->add_option("--max-iter", ta.logit.max_iter)->capture_default_str();
  train->add_option("--tolerance", ta.logit.tolerance);
  train->add_option("--ridge", ta.logit.ridge);
  train->add_flag("--standardize", ta.logit.standardize);

  EvalArgs ea;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a model on a feature file");
  evaluate_cmd->add_option("--model", ea.model)->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--features", ea.features)->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--out", ea.out);
  evaluate_cmd->add_option("--threshold", ea.threshold, "Logit decision threshold");

  CompareArgs cpa;
  auto* compare_cmd = app.add_subcommand("compare", "Tabulate evaluation reports side by side");
  compare_cmd->add_option("reports", cpa.reports)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--json", cpa.json_out, "Also write the table as JSON");

  ModelArgs da;
  auto* describe = app.add_subcommand("describe", "Print a tree as root-to-leaf rules");
  describe->add_option("--model", da.model)->required()->check(CLI::ExistingFile);
  describe->add_option("--max-leaves", da.max_leaves, "0 = all");

  ModelArgs oa;
  auto* odds = app.add_subcommand("odds", "Coefficients and odds ratios of a logistic model");
  odds->add_option("--model", oa.model)->required()->check(CLI::ExistingFile);

  SynthArgs ya;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic call-record corpus");
  auto* preset_opt = synth->add_option("--preset", ya.preset)->check(CLI::IsMember({"paperlike", "cij-steep"}));
  auto* config_opt = synth->add_option("--config", ya.config, "SynthConfig JSON")->check(CLI::ExistingFile);
  preset_opt->excludes(config_opt);
  synth->add_option("--seed", ya.seed);
  synth->add_option("--vertices", ya.vertices, "Override vertex count");
  synth->add_option("--out", ya.out)->required();
  auto* describe_truth_cmd = app.add_subcommand("truth", "Print the planted rule of a corpus");
  std::string truth_path;
  describe_truth_cmd->add_option("file", truth_path, "truth.json")->required()->check(CLI::ExistingFile);

  RunArgs rn;
  auto& pc = rn.cfg;
  auto* run = app.add_subcommand("run", "Run the whole pipeline");
  std::string run_config;
  run->add_option("--config", run_config, "TOML or INI file keyed by flag names; flags win")
      ->check(CLI::ExistingFile);
  run->add_option("--out", pc.out_dir, "Output directory")->capture_default_str();
  run->add_option("--records", rn.records, "Raw call-record CSV");
  run->add_option("--preset", rn.preset, "Synthetic preset")->check(CLI::IsMember({"paperlike", "cij-steep"}));
  run->add_option("--synth-config", rn.synth_config, "SynthConfig JSON");
  run->add_option("--vertices", rn.vertices, "Override synthetic vertex count");
  run->add_option("--seed", pc.seed, "Global seed")->capture_default_str();
  run->add_flag("--has-header", pc.has_header);
  run->add_flag("--strict", pc.strict);
  run->add_option("--min-duration", pc.min_duration);
  run->add_option("--types", rn.types)->delimiter(',');
  run->add_option("--in-network-ids", rn.in_network);
  auto* t0_opt = run->add_option("--t0", rn.t0);
  auto* d1_opt = run->add_option("--delta1", rn.delta1);
  auto* d2_opt = run->add_option("--delta2", rn.delta2);
  run->add_option("--max-neighbors", pc.filter.max_neighbors);
  run->add_option("--neighbor-mode", rn.neighbor_mode)->check(CLI::IsMember({"out", "total"}));
  run->add_option("--injn-mode", rn.injn_mode)->check(CLI::IsMember({"arcs", "calls"}));
  run->add_option("--persist-mode", rn.persist_mode)->check(CLI::IsMember({"directed", "either"}));
  run->add_option("--gain-mode", rn.gain_mode)->check(CLI::IsMember({"weighted", "unweighted"}));
  run->add_option("--discretization", rn.discretization)
      ->check(CLI::IsMember({"categorical", "best-binary-split", "equal-frequency"}));
  run->add_option("--bins", pc.discretization.bins);
  run->add_option("--train-fraction", pc.train_fraction)->check(CLI::Range(0.0, 1.0));
  run->add_flag("--stratify", pc.stratify);
  run->add_option("--min-leaf", pc.tree.min_leaf_size);
  run->add_option("--max-depth", rn.max_depth, "0 = unlimited");
  run->add_option("--min-gain", pc.tree.min_gain);
  run->add_option("--max-iter", pc.logit.max_iter);
  run->add_option("--tolerance", pc.logit.tolerance);
  run->add_option("--ridge", pc.logit.ridge);
  run->add_flag("--standardize", pc.logit.standardize);
  run->add_option("--threshold", pc.threshold);
  run->add_flag("--resume", pc.resume, "Reuse stages whose inputs are unchanged");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  spdlog::set_level(g.quiet ? spdlog::level::err
                    : g.verbosity > 0 ? spdlog::level::debug
                                      : spdlog::level::info);

  try {
    if (*ingest) {
      IngestConfig cfg;
      cfg.horizon_start = ia.start;
      cfg.horizon_end = ia.end;
      cfg.keep_call_types = call_types(ia.types);
      cfg.strict = ia.strict;
      cfg.has_header = ia.has_header;
      cfg.min_duration = ia.min_duration;
      if (!ia.in_network.empty()) cfg.in_network_ids = read_id_list(ia.in_network);
      const auto report = ingest_stage(ia.input, cfg, ia.out, ia.report);
      if (ia.report.empty()) std::cout << ingest_report_json(report).dump(2) << "\n";
      spdlog::info("ingest: {} of {} rows accepted", report.accepted, report.total_rows);
    } else if (*build) {
      const auto pair = build_stage(ba.records, {ba.t0, ba.delta1, ba.delta2},
                                    {ba.max_neighbors, parse_neighbor_mode(ba.neighbor_mode)}, ba.out);
      spdlog::info("build: tau1 {} arcs, tau2 {} arcs, {} robots removed", pair.tau1.arcs().size(),
                   pair.tau2.arcs().size(), pair.removed.size());
    } else if (*features) {
      FeatureOptions opts{parse_injn_mode(fa.injn_mode), parse_persist_mode(fa.persist_mode), g.threads};
      const auto edges = features_stage(fa.tau1, fa.tau2, opts, fa.out);
      spdlog::info("features: {} labeled edges", edges.size());
    } else if (*summarize_cmd) {
      std::optional<std::string> cdf;
      if (!sa.cdf_out.empty()) cdf = sa.cdf_out;
      summarize_stage(sa.features, sa.out, cdf);
    } else if (*correlate) {
      correlate_stage(ca.features, ca.out);
    } else if (*rank) {
      Discretization how{parse_discretization(ra.discretization), ra.bins};
      print_ranking(rank_stage(ra.features, parse_gain_mode(ra.mode), how, ra.out));
    } else if (*split_cmd) {
      const auto s = split_stage(spa.features, {spa.fraction, spa.seed, spa.stratify}, spa.train_out,
                                 spa.test_out);
      spdlog::info("split: {} train, {} test", s.train.size(), s.test.size());
    } else if (*train) {
      if (ta.max_depth > 0) ta.tree.max_depth = ta.max_depth;
      const auto model = train_stage(parse_model_kind(ta.model), ta.features, ta.tree, ta.logit, ta.out);
      if (const auto* m = std::get_if<LogitModel>(&model); m && !m->training.converged) {
        spdlog::warn("logit: not converged after {} iterations (gradient {:.3g})", m->training.iterations,
                     m->training.gradient_norm);
      }
    } else if (*evaluate_cmd) {
      print_report(evaluate_stage(ea.model, ea.features, ea.out, ea.threshold));
    } else if (*compare_cmd) {
      std::vector<EvalReport> reports;
      for (const auto& p : cpa.reports) reports.push_back(EvalReport::from_json(read_json_file(p)));
      std::cout << compare(reports);
      if (!cpa.json_out.empty()) write_text_file(cpa.json_out, compare_json(reports).dump(2) + "\n");
    } else if (*describe) {
      const auto model = load_model(da.model);
      const auto* tree = std::get_if<DecisionTree>(&model);
      if (!tree) throw UsageError("describe: " + da.model + " is not a tree model");
      for (const auto& leaf : describe_tree(*tree, da.max_leaves)) std::cout << leaf.text << "\n";
    } else if (*odds) {
      const auto model = load_model(oa.model);
      const auto* logit = std::get_if<LogitModel>(&model);
      if (!logit) throw UsageError("odds: " + oa.model + " is not a logistic model");
      std::cout << odds_table(*logit);
    } else if (*synth) {
      if (ya.preset.empty() == ya.config.empty()) throw UsageError("synth: give --preset or --config");
      SynthConfig cfg = ya.config.empty() ? synth_preset(ya.preset, ya.seed)
                                          : SynthConfig::from_json(read_json_file(ya.config));
      if (!ya.config.empty() && synth->count("--seed")) cfg.seed = ya.seed;
      if (ya.vertices > 0) cfg.n_vertices = ya.vertices;
      const auto corpus = generate(cfg);
      write_corpus(corpus, ya.out);
      spdlog::info("synth: {} vertices, {} arcs, {} records, persist share {:.3f}, median out-degree {}",
                   corpus.stats.vertices, corpus.stats.arcs, corpus.stats.records,
                   corpus.stats.persist_share, corpus.stats.median_out_degree);
    } else if (*describe_truth_cmd) {
      const auto t = describe_truth_file(truth_path);
      std::printf("preset %s, seed %llu\n", t.preset.c_str(), static_cast<unsigned long long>(t.seed));
      std::printf("windows: t0 %lld, delta1 %lld, delta2 %lld\n", static_cast<long long>(t.windows.t0),
                  static_cast<long long>(t.windows.delta1), static_cast<long long>(t.windows.delta2));
      std::printf("%-8s %10.4f\n", "(const)", t.intercept);
      for (const auto& [f, b] : t.coefficients) {
        std::printf("%-8s %10.4f\n", std::string(feature_name(f)).c_str(), b);
      }
    } else if (*run) {
      if (!run_config.empty()) apply_config_file(*run, run_config);
      if (!rn.records.empty()) pc.records = rn.records;
      if (!rn.preset.empty()) pc.synth_preset = rn.preset;
      if (!rn.synth_config.empty()) pc.synth_config = rn.synth_config;
      if (rn.vertices > 0) pc.synth_vertices = rn.vertices;
      if (!rn.in_network.empty()) pc.in_network_ids = rn.in_network;
      if (t0_opt->count()) pc.t0 = rn.t0;
      if (d1_opt->count()) pc.delta1 = rn.delta1;
      if (d2_opt->count()) pc.delta2 = rn.delta2;
      pc.keep_call_types = call_types(rn.types);
      pc.filter.mode = parse_neighbor_mode(rn.neighbor_mode);
      pc.features = {parse_injn_mode(rn.injn_mode), parse_persist_mode(rn.persist_mode), g.threads};
      pc.gain_mode = parse_gain_mode(rn.gain_mode);
      pc.discretization.kind = parse_discretization(rn.discretization);
      if (rn.max_depth > 0) pc.tree.max_depth = rn.max_depth;
      const auto manifest = run_pipeline(pc, [](const std::string& msg) { spdlog::info("{}", msg); });
      std::cout << std::ifstream(pc.out_dir + "/comparison.txt").rdbuf();
      spdlog::info("run: {} stages, manifest at {}/manifest.json", manifest.stages.size(), pc.out_dir);
    }
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const DataError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const StageError& e) {
    spdlog::error("{}", e.what());
    return e.data_error() ? 2 : 3;
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return 3;
  }
  return 0;
}
