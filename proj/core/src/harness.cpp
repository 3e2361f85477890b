#include "botstack/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "botstack/checksum.hpp"
#include "botstack/encoded_io.hpp"
#include "botstack/error.hpp"
#include "botstack/presets.hpp"
#include "botstack/stacking.hpp"

#ifndef BOTSTACK_SOURCE_DATA_DIR
#define BOTSTACK_SOURCE_DATA_DIR ""
#endif
#ifndef BOTSTACK_INSTALL_DATA_DIR
#define BOTSTACK_INSTALL_DATA_DIR ""
#endif

namespace botstack {
namespace fs = std::filesystem;

namespace {

constexpr const char* kFixtureFile = "fixture/unsw_nb15_fixture.csv";
constexpr const char* kSchemaFile = "schema/unsw_nb15.json";

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::string classes_label(LabelMode mode) { return mode == LabelMode::binary ? "Binary class" : "Multiclass class"; }

LabelMode mode_of(const ModelConfig& c) { return c.head == Head::sigmoid ? LabelMode::binary : LabelMode::multiclass; }

AnyModel fit(const ModelConfig& cfg, const EncodedMatrix& train_data, TrainReport& report, std::ostream& out) {
  TrainOptions opts;
  opts.on_epoch = [&](const EpochStats& e) {
    out << cfg.name << " epoch " << e.epoch << "/" << cfg.epochs << " loss " << std::setprecision(6) << e.loss
        << " running accuracy " << e.running_accuracy << "\n";
  };
  if (cfg.kind == ModelKind::stacked) {
    StackedTrainResult r = train_stacked(cfg, train_data, opts);
    report = std::move(r.report);
    return std::move(r.model);
  }
  Model m(cfg, train_data.features());
  report = train(m, train_data, opts);
  return m;
}

}  // namespace

Schema load_schema(const DataSource& src) {
  if (!src.schema.empty()) return Schema::load(src.schema);
  const fs::path bundled = bundled_schema_path();
  if (!bundled.empty() && fs::exists(bundled)) return Schema::load(bundled);
  return unsw_nb15_schema();
}

fs::path bundled_data_dir() {
  if (const char* env = std::getenv("BOTSTACK_DATA_DIR"); env && *env) return env;
  for (const char* dir : {BOTSTACK_SOURCE_DATA_DIR, BOTSTACK_INSTALL_DATA_DIR}) {
    if (*dir && fs::exists(fs::path(dir) / kFixtureFile)) return dir;
  }
  return {};
}

fs::path fixture_path() {
  const fs::path dir = bundled_data_dir();
  if (dir.empty()) throw IoError("bundled fixture not found; set BOTSTACK_DATA_DIR");
  return dir / kFixtureFile;
}

fs::path bundled_schema_path() {
  const fs::path dir = bundled_data_dir();
  return dir.empty() ? fs::path() : dir / kSchemaFile;
}

fs::path default_out_root() {
  if (const char* env = std::getenv("BOTSTACK_OUT_ROOT"); env && *env) return env;
  return "runs";
}

// ---------------------------------------------------------------------------

void RunConfig::resolve() {
  if (source.fixture) {
    if (!source.data.empty()) throw UsageError("--fixture and --data are mutually exclusive");
    source.data = fixture_path();
  }
  if (source.data.empty()) throw UsageError("no dataset given (use --data <csv> or --fixture)");
  if (!source.schema.empty() && !fs::exists(source.schema)) {
    throw IoError("schema file not found: " + source.schema.string());
  }
  if (!fs::exists(source.data)) throw IoError("data file not found: " + source.data.string());
  if (source.schema.empty()) {
    const fs::path bundled = bundled_schema_path();
    if (!bundled.empty() && fs::exists(bundled)) source.schema = bundled;
  }
  pipeline.seed = seed;
  dataset_checksum = file_checksum(source.data);
  if (out_dir.empty()) out_dir = default_out_root() / (command + "-seed" + std::to_string(seed));
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json models_json = nlohmann::json::array();
  for (const ModelConfig& m : models) models_json.push_back(m.to_json());
  nlohmann::json j{{"command", command},
                   {"data", source.data.string()},
                   {"schema", source.schema.string()},
                   {"fixture", source.fixture},
                   {"pipeline", pipeline.to_json()},
                   {"models", models_json},
                   {"seed", seed},
                   {"out_dir", out_dir.string()},
                   {"subset", subset},
                   {"precision", "double"}};
  if (!model_path.empty()) j["model"] = model_path.string();
  j["dataset_checksum"] = dataset_checksum ? nlohmann::json(hex64(*dataset_checksum)) : nlohmann::json(nullptr);
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  try {
    RunConfig c;
    c.command = j.value("command", std::string());
    c.source.data = j.value("data", std::string());
    c.source.schema = j.value("schema", std::string());
    c.source.fixture = false;  // paths are already resolved
    c.pipeline = PipelineConfig::from_json(j.at("pipeline"));
    for (const auto& m : j.value("models", nlohmann::json::array())) c.models.push_back(ModelConfig::from_json(m));
    c.seed = j.value("seed", c.seed);
    c.out_dir = j.value("out_dir", std::string());
    c.subset = j.value("subset", c.subset);
    c.model_path = j.value("model", std::string());
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed run config: ") + e.what());
  }
}

void RunConfig::write(const fs::path& dir) const {
  ensure_dir(dir);
  write_json(dir / "run_config.json", to_json());
}

LoadedData load_and_prepare(const RunConfig& config) {
  LoadedData d;
  d.raw = load_csv(config.source.data, load_schema(config.source));
  d.prepared = prepare(d.raw, config.pipeline);
  return d;
}

std::vector<ModelConfig> resolve_models(const std::vector<std::string>& presets,
                                        const std::optional<fs::path>& config_file, LabelMode mode,
                                        std::uint64_t seed, std::size_t classes) {
  std::vector<ModelConfig> out;
  for (const std::string& name : presets) {
    if (name == "all") {
      for (const std::string& n : preset_names()) out.push_back(preset(n, mode, seed, classes));
    } else {
      out.push_back(preset(name, mode, seed, classes));
    }
  }
  if (config_file) {
    std::ifstream in(*config_file);
    if (!in) throw IoError("config file not found: " + config_file->string());
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file " + config_file->string() + " is not valid JSON: " + e.what());
    }
    const nlohmann::json items = j.is_array() ? j : nlohmann::json::array({j});
    for (const auto& item : items) {
      ModelConfig c = ModelConfig::from_json(item);
      if (!item.contains("seed")) c.seed = seed;
      c.validate();
      out.push_back(std::move(c));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

nlohmann::json IngestSummary::to_json() const {
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [name, n] : class_counts) counts[name] = n;
  return {{"rows", rows},
          {"class_counts", counts},
          {"feature_width", feature_width},
          {"train_rows", train_rows},
          {"test_rows", test_rows}};
}

IngestSummary cmd_ingest(RunConfig config, std::ostream& out) {
  config.command = "ingest";
  config.resolve();
  config.write(config.out_dir);

  const RawDataset raw = load_csv(config.source.data, load_schema(config.source));
  IngestSummary s;
  s.rows = raw.size();
  const std::vector<std::size_t> counts = raw.category_counts();
  for (std::size_t c = 0; c < counts.size(); ++c) s.class_counts.emplace_back(raw.schema.classes[c], counts[c]);

  out << "rows: " << s.rows << "\n";
  out << "classes:\n";
  for (const auto& [name, n] : s.class_counts) out << "  " << name << ": " << n << "\n";

  if (s.rows > 0) {
    const PreparedData p = prepare(raw, config.pipeline);
    s.feature_width = p.train.features();
    s.train_rows = p.train.rows();
    s.test_rows = p.test.rows();
    EncodedMatrix all = encode(raw, p.encoder, config.pipeline.mode);
    p.normalizer.apply(all.x);
    write_encoded(config.out_dir / "encoded_x.bin", all.x);
    write_encoded(config.out_dir / "encoded_y.bin", all.targets);
    write_json(config.out_dir / "encoder.json",
               {{"features", all.feature_names}, {"categorical", p.encoder.to_json()}, {"normalizer", p.normalizer.to_json()}});
  }
  out << "feature width: " << s.feature_width << "\n";
  out << "train rows (after balancing): " << s.train_rows << ", test rows: " << s.test_rows << "\n";
  write_json(config.out_dir / "ingest_summary.json", s.to_json());
  return s;
}

std::vector<TrainOutcome> cmd_train(RunConfig config, std::ostream& out) {
  config.command = "train";
  if (config.models.empty()) throw UsageError("train needs --preset or --config");
  config.resolve();
  for (const ModelConfig& m : config.models) {
    if (mode_of(m) != config.pipeline.mode) {
      throw UsageError("model '" + m.name + "' does not match label mode " +
                       std::string(label_mode_name(config.pipeline.mode)));
    }
  }
  config.write(config.out_dir);
  const LoadedData data = load_and_prepare(config);

  std::vector<TrainOutcome> outcomes;
  for (const ModelConfig& cfg : config.models) {
    with_context("model '" + cfg.name + "'", [&] {
      const fs::path dir = config.out_dir / cfg.name;
      ensure_dir(dir);
      TrainOutcome o;
      o.name = cfg.name;
      const AnyModel model = fit(cfg, data.prepared.train, o.report, out);
      o.model_file = dir / "model.bin";
      save_model(model, o.model_file);
      write_json(dir / "train_report.json", o.report.to_json());
      write_json(dir / "summary.json", model_summary(model));
      out << cfg.name << ": final train accuracy " << std::setprecision(6) << o.report.final_train_accuracy << ", "
          << o.report.seconds << " s -> " << o.model_file.string() << "\n";
      outcomes.push_back(std::move(o));
      return 0;
    });
  }
  return outcomes;
}

MetricsReport cmd_evaluate(RunConfig config, std::ostream& out) {
  config.command = "evaluate";
  if (config.model_path.empty()) throw UsageError("evaluate needs --model");
  if (config.subset != "test" && config.subset != "train") throw UsageError("--subset must be test or train");
  const AnyModel model = load_model(config.model_path);
  const ModelConfig& mc = model_config(model);
  config.pipeline.mode = mode_of(mc);
  if (config.out_dir.empty()) config.out_dir = config.model_path.parent_path();
  config.resolve();
  config.write(config.out_dir);

  const LoadedData data = load_and_prepare(config);
  const EncodedMatrix& subset = config.subset == "train" ? data.prepared.train : data.prepared.test;
  if (subset.features() != model_input_width(model)) {
    throw UsageError("model expects " + std::to_string(model_input_width(model)) + " features, data encodes to " +
                     std::to_string(subset.features()));
  }
  const Tensor probs = predict_proba(model, subset.x);
  const MetricsReport report =
      evaluate_predictions(probs, subset.classes, class_names(data.raw.schema, config.pipeline.mode));

  nlohmann::json metrics = report.to_json();
  metrics["model"] = mc.name;
  metrics["subset"] = config.subset;
  metrics["rows"] = subset.rows();
  write_json(config.out_dir / "metrics.json", metrics);

  std::string seconds = "-";
  const fs::path train_report = config.model_path.parent_path() / "train_report.json";
  if (fs::exists(train_report)) {
    std::ifstream in(train_report);
    const nlohmann::json tr = nlohmann::json::parse(in, nullptr, false);
    if (tr.is_object() && tr.contains("training_seconds")) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.1f", tr["training_seconds"].get<double>());
      seconds = buf;
    }
  }
  std::ostringstream table;
  table << kTableHeader << "\n"
        << mc.epochs << "\t" << percent(report.accuracy) << "\t" << percent(report.precision) << "\t"
        << percent(report.recall) << "\t" << percent(report.f1) << "\t" << seconds << "\n";
  write_text(config.out_dir / "metrics_table.txt", table.str());

  if (!report.roc.empty()) {
    std::ostringstream roc;
    roc << "fpr,tpr,threshold\n" << std::setprecision(17);
    for (const RocPoint& p : report.roc) roc << p.fpr << "," << p.tpr << "," << p.threshold << "\n";
    write_text(config.out_dir / "roc.csv", roc.str());
  }

  out << table.str();
  out << "roc_auc: " << (report.roc_auc ? percent(*report.roc_auc) : std::string("undefined")) << "\n";
  return report;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream csv;
  csv << kComparisonHeader << "\n";
  for (const ComparisonRow& r : rows) {
    csv << r.model << "," << r.classes << "," << percent(r.metrics.accuracy) << "," << percent(r.metrics.precision)
        << "," << percent(r.metrics.recall) << "," << percent(r.metrics.f1) << "\n";
  }
  return csv.str();
}

std::vector<ComparisonRow> cmd_compare(RunConfig config, std::ostream& out) {
  config.command = "compare";
  if (config.models.size() < 2) throw UsageError("compare needs at least two model configs");
  config.resolve();
  for (const ModelConfig& m : config.models) {
    if (mode_of(m) != config.pipeline.mode) {
      throw UsageError("model '" + m.name + "' does not match label mode " +
                       std::string(label_mode_name(config.pipeline.mode)));
    }
  }
  config.write(config.out_dir);
  const LoadedData data = load_and_prepare(config);
  const std::vector<std::string> names = class_names(data.raw.schema, config.pipeline.mode);

  std::vector<ComparisonRow> rows;
  for (const ModelConfig& cfg : config.models) {
    with_context("model '" + cfg.name + "'", [&] {
      TrainReport report;
      std::ostringstream quiet;
      const AnyModel model = fit(cfg, data.prepared.train, report, quiet);
      ComparisonRow row{cfg.name, classes_label(config.pipeline.mode),
                        evaluate_predictions(predict_proba(model, data.prepared.test.x), data.prepared.test.classes, names)};
      out << cfg.name << ": test accuracy " << percent(row.metrics.accuracy) << "% (" << std::setprecision(4)
          << report.seconds << " s)\n";
      rows.push_back(std::move(row));
      return 0;
    });
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ComparisonRow& a, const ComparisonRow& b) { return a.metrics.accuracy > b.metrics.accuracy; });

  const std::string csv = comparison_csv(rows);
  write_text(config.out_dir / "comparison.csv", csv);
  nlohmann::json j = nlohmann::json::array();
  for (const ComparisonRow& r : rows) {
    nlohmann::json m = r.metrics.to_json();
    m["model"] = r.model;
    m["classes"] = r.classes;
    j.push_back(m);
  }
  write_json(config.out_dir / "comparison.json", j);
  out << csv;
  return rows;
}

}  // namespace botstack
