#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "botstack/metrics.hpp"
#include "botstack/model_config.hpp"
#include "botstack/model_io.hpp"
#include "botstack/pipeline.hpp"
#include "botstack/train.hpp"

namespace botstack {

/// Where data files come from. `--fixture` selects the bundled 1,000-row
/// file and schema.
struct DataSource {
  std::filesystem::path data;
  std::filesystem::path schema;  // empty: bundled schema, or the built-in copy
  bool fixture = false;
};

/// Directory holding the bundled fixture and schema: $BOTSTACK_DATA_DIR when
/// set, otherwise the source tree, otherwise the install prefix.
std::filesystem::path bundled_data_dir();
std::filesystem::path fixture_path();
std::filesystem::path bundled_schema_path();

/// The schema named by `src`, else the bundled file, else the built-in copy.
Schema load_schema(const DataSource& src);

/// Output root for runs without --out: $BOTSTACK_OUT_ROOT, default "runs".
std::filesystem::path default_out_root();

/// Everything needed to replay a command.
struct RunConfig {
  std::string command;
  DataSource source;
  PipelineConfig pipeline;
  std::vector<ModelConfig> models;
  std::uint64_t seed = 42;
  std::filesystem::path out_dir;
  std::string subset = "test";            // evaluate: test or train
  std::filesystem::path model_path;       // evaluate
  std::optional<std::uint64_t> dataset_checksum;

  /// Fills in fixture paths and the data checksum. UsageError when no data
  /// source is given.
  void resolve();
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  void write(const std::filesystem::path& dir) const;
};

struct LoadedData {
  RawDataset raw;
  PreparedData prepared;
};

/// Loads the CSV named by `config` and runs the pipeline.
LoadedData load_and_prepare(const RunConfig& config);

struct IngestSummary {
  std::size_t rows = 0;
  std::vector<std::pair<std::string, std::size_t>> class_counts;
  std::size_t feature_width = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  nlohmann::json to_json() const;
};

/// Prints row, class and width counts; writes encoded_x.bin, encoded_y.bin
/// (every row, original order, encoded with train-fitted statistics),
/// ingest_summary.json and run_config.json under config.out_dir.
IngestSummary cmd_ingest(RunConfig config, std::ostream& out);

struct TrainOutcome {
  std::string name;
  TrainReport report;
  std::filesystem::path model_file;
};

/// Trains every model in config.models on the training split. Each lands in
/// out_dir/<name>/ as train_report.json, model.bin and summary.json.
std::vector<TrainOutcome> cmd_train(RunConfig config, std::ostream& out);

/// Scores config.model_path on the chosen subset. Writes metrics.json,
/// metrics_table.txt and roc.csv (binary heads) to out_dir.
MetricsReport cmd_evaluate(RunConfig config, std::ostream& out);

struct ComparisonRow {
  std::string model;
  std::string classes;
  MetricsReport metrics;
};

/// Trains and tests every model on one shared split. Writes comparison.csv
/// (Model,Classes,Accuracy,Precision,Recall,F1-Score; percentages, sorted by
/// accuracy descending) and comparison.json.
std::vector<ComparisonRow> cmd_compare(RunConfig config, std::ostream& out);

inline constexpr const char* kComparisonHeader = "Model,Classes,Accuracy,Precision,Recall,F1-Score";
inline constexpr const char* kTableHeader = "Epoch\tAccuracy\tPrecision\tRecall\tF1-Score\tTraining time (s)";

std::string comparison_csv(const std::vector<ComparisonRow>& rows);

/// Model configs named by presets or read from a JSON file holding one config
/// or an array of them.
std::vector<ModelConfig> resolve_models(const std::vector<std::string>& presets,
                                        const std::optional<std::filesystem::path>& config_file, LabelMode mode,
                                        std::uint64_t seed, std::size_t classes);

}  // namespace botstack
