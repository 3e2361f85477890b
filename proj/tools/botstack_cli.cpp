#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "botstack/error.hpp"
#include "botstack/harness.hpp"
#include "botstack/presets.hpp"
#include "botstack/runtime.hpp"

namespace {

struct CommonFlags {
  std::string data;
  std::string schema;
  bool fixture = false;
  std::uint64_t seed = 42;
  std::string out;
  std::string label_mode = "binary";
  double test_fraction = 0.3;
  bool no_balance = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--data", f.data, "UNSW-NB15-style feature CSV");
  cmd->add_option("--schema", f.schema, "schema JSON (default: bundled UNSW-NB15 schema)");
  cmd->add_flag("--fixture", f.fixture, "use the bundled 1,000-row fixture");
  cmd->add_option("--seed", f.seed, "run seed")->capture_default_str();
  cmd->add_option("--out", f.out, "output directory (default: $BOTSTACK_OUT_ROOT/<command>-seed<seed>)");
  cmd->add_option("--label-mode", f.label_mode, "binary or multiclass")
      ->check(CLI::IsMember({"binary", "multiclass"}))
      ->capture_default_str();
  cmd->add_option("--test-fraction", f.test_fraction, "held-out fraction of the stratified split")
      ->capture_default_str();
  cmd->add_flag("--no-balance", f.no_balance, "do not oversample the training split");
}

botstack::RunConfig make_run(const CommonFlags& f) {
  botstack::RunConfig rc;
  rc.source.data = f.data;
  rc.source.schema = f.schema;
  rc.source.fixture = f.fixture;
  rc.seed = f.seed;
  rc.out_dir = f.out;
  rc.pipeline.mode = botstack::parse_label_mode(f.label_mode);
  rc.pipeline.test_fraction = f.test_fraction;
  rc.pipeline.balance = !f.no_balance;
  rc.pipeline.seed = f.seed;
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  botstack::tune_allocator();
  CLI::App app{"botstack: stacked deep-learning botnet detection on UNSW-NB15-style data"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::vector<std::string> presets;
  std::string config_file;
  std::string model_file;
  std::string subset = "test";
  bool list_presets = false;

  auto* ingest = app.add_subcommand("ingest", "load, encode and summarise a dataset");
  add_common(ingest, flags);

  auto* train = app.add_subcommand("train", "train presets or configs and save models");
  add_common(train, flags);
  train->add_option("--preset", presets, "preset name (repeatable, 'all' for every preset)");
  train->add_option("--config", config_file, "JSON model config (object or array)");
  train->add_flag("--list-presets", list_presets, "print the preset names and exit");

  auto* evaluate = app.add_subcommand("evaluate", "score a saved model");
  add_common(evaluate, flags);
  evaluate->add_option("--model", model_file, "model.bin written by train")->required();
  evaluate->add_option("--subset", subset, "split to score")->check(CLI::IsMember({"test", "train"}))->capture_default_str();

  auto* compare = app.add_subcommand("compare", "train and test several models on one split");
  add_common(compare, flags);
  compare->add_option("--preset", presets, "preset name (repeatable, 'all' for every preset)");
  compare->add_option("--config", config_file, "JSON model config (object or array)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    botstack::RunConfig rc = make_run(flags);
    const std::optional<std::filesystem::path> cfg =
        config_file.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_file);
    if (*ingest) {
      botstack::cmd_ingest(rc, std::cout);
    } else if (*train) {
      if (list_presets) {
        for (const auto& n : botstack::preset_names()) std::cout << n << "\n";
        return 0;
      }
      rc.models = botstack::resolve_models(presets, cfg, rc.pipeline.mode, rc.seed, botstack::load_schema(rc.source).classes.size());
      botstack::cmd_train(rc, std::cout);
    } else if (*evaluate) {
      rc.model_path = model_file;
      rc.subset = subset;
      botstack::cmd_evaluate(rc, std::cout);
    } else if (*compare) {
      rc.models = botstack::resolve_models(presets, cfg, rc.pipeline.mode, rc.seed, botstack::load_schema(rc.source).classes.size());
      botstack::cmd_compare(rc, std::cout);
    }
  } catch (const botstack::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
