#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "decaygraph/edge_features.hpp"
#include "decaygraph/evaluation.hpp"
#include "decaygraph/feature_stats.hpp"
#include "decaygraph/infogain.hpp"
#include "decaygraph/logit.hpp"
#include "decaygraph/records.hpp"
#include "decaygraph/synth.hpp"
#include "decaygraph/tree.hpp"
#include "decaygraph/window_graph.hpp"

// File-level operations shared by the CLI subcommands and `run`. Each takes
// paths, calls the library, and writes its outputs; `run` chains them.
namespace decaygraph {

// ---- JSON / CSV renderings ---------------------------------------------
nlohmann::json ingest_report_json(const IngestReport& r);
nlohmann::json summary_json(const FeatureSummary& s);
nlohmann::json ranking_json(const FeatureRanking& r);
std::string correlation_csv(const CorrelationMatrix& m);
std::string odds_table(const LogitModel& m);

using Model = std::variant<DecisionTree, LogitModel>;
Model load_model(const std::string& path);
void save_model(const Model& m, const std::string& path);
std::vector<int> predict_labels(const Model& m, std::span<const LabeledEdge> edges,
                                double threshold = 0.5);
std::string model_kind(const Model& m);

nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// ---- stage operations ----------------------------------------------------
IngestReport ingest_stage(const std::string& input, const IngestConfig& cfg,
                          const std::string& records_out, const std::string& report_out);

// Writes tau1.csv, tau2.csv and robots.json into out_dir.
WindowPair build_stage(const std::string& records, const WindowConfig& wc,
                       const RobotFilterConfig& filter, const std::string& out_dir);

std::vector<LabeledEdge> features_stage(const std::string& tau1, const std::string& tau2,
                                        const FeatureOptions& opts, const std::string& out);

FeatureSummary summarize_stage(const std::string& features, const std::string& out,
                               const std::optional<std::string>& cdf_dir = std::nullopt);
CorrelationMatrix correlate_stage(const std::string& features, const std::string& out);
FeatureRanking rank_stage(const std::string& features, GainMode mode, const Discretization& how,
                          const std::string& out);
SplitResult split_stage(const std::string& features, const SplitConfig& cfg,
                        const std::string& train_out, const std::string& test_out);

enum class ModelKind { tree, logit };
ModelKind parse_model_kind(const std::string& s);
Model train_stage(ModelKind kind, const std::string& features, const TreeConfig& tree_cfg,
                  const LogitConfig& logit_cfg, const std::string& out);
EvalReport evaluate_stage(const std::string& model, const std::string& features,
                          const std::string& out, double threshold = 0.5);

// ---- orchestration -------------------------------------------------------
struct PipelineConfig {
  std::string out_dir = "decaygraph-run";
  // Exactly one input source: an existing record file or a synthetic preset.
  std::optional<std::string> records;
  std::optional<std::string> synth_preset;
  std::optional<std::string> synth_config;  // JSON file, implies synthetic input
  std::optional<std::size_t> synth_vertices;

  std::uint64_t seed = 1;
  bool has_header = false;
  bool strict = false;
  std::int64_t min_duration = 0;
  std::set<CallType> keep_call_types{CallType::voice};
  std::optional<std::string> in_network_ids;

  // Unset window fields come from the synthetic config when one is used.
  std::optional<Timestamp> t0;
  std::optional<std::int64_t> delta1;
  std::optional<std::int64_t> delta2;
  RobotFilterConfig filter;
  FeatureOptions features;
  GainMode gain_mode = GainMode::weighted;
  Discretization discretization;
  double train_fraction = 2.0 / 3.0;
  bool stratify = false;
  TreeConfig tree;
  LogitConfig logit;
  double threshold = 0.5;
  bool resume = false;
};

struct StageOutput {
  std::string path;  // relative to out_dir
  std::string hash;
};

struct StageRecord {
  std::string name;
  std::string input_hash;
  std::vector<StageOutput> outputs;
  bool reused = false;
};

struct Manifest {
  std::uint64_t seed = 0;
  std::optional<StageRecord> source;  // the synth step, when input is generated
  std::vector<StageRecord> stages;

  nlohmann::json to_json() const;
  static Manifest from_json(const nlohmann::json& j);
  const StageRecord* find(const std::string& name) const;
};

class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& cause, bool data_error)
      : std::runtime_error("stage '" + stage + "' failed: " + cause),
        stage_(std::move(stage)),
        data_error_(data_error) {}
  const std::string& stage() const { return stage_; }
  bool data_error() const { return data_error_; }

 private:
  std::string stage_;
  bool data_error_;
};

using Logger = std::function<void(const std::string&)>;

// ingest -> build -> features -> correlate, rank -> split ->
// train -> evaluate -> compare, writing manifest.json last. With resume set,
// a stage whose input hash and outputs match the previous manifest is reused.
// A failing stage leaves `<stage>.partial` in out_dir and raises StageError.
Manifest run_pipeline(const PipelineConfig& cfg, const Logger& log = {});

inline constexpr const char* kVersion = "1.0.0";

}  // namespace decaygraph
