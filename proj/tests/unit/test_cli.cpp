#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "botstack/harness.hpp"
#include "botstack/model_config.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(BOTSTACK_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "botstack_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("ingest on the fixture") {
  const fs::path out = scratch("ingest");
  const std::string before = slurp(botstack::fixture_path());
  const Run r = run("ingest --fixture --out " + out.string());
  CHECK(r.code == 0);
  CHECK(r.output.find("rows: 1000") != std::string::npos);
  for (const char* c : {"Normal", "Fuzzers", "Backdoor", "DoS", "Exploits", "Generic", "Reconnaissance", "Analysis",
                        "Shellcode", "Worms"}) {
    CHECK(r.output.find(std::string(c) + ":") != std::string::npos);
  }
  CHECK(fs::exists(out / "encoded_x.bin"));
  const nlohmann::json cfg = read_json(out / "run_config.json");
  CHECK(cfg.contains("dataset_checksum"));
  CHECK(cfg["seed"] == 42);
  CHECK(slurp(botstack::fixture_path()) == before);

  const fs::path again = scratch("ingest2");
  CHECK(run("ingest --fixture --out " + again.string()).code == 0);
  CHECK(slurp(out / "encoded_x.bin") == slurp(again / "encoded_x.bin"));
  CHECK(slurp(out / "encoded_y.bin") == slurp(again / "encoded_y.bin"));
}

TEST_CASE("usage failures exit with 2") {
  const Run schema = run("ingest --data /nonexistent/data.csv --schema /nonexistent/schema.json --out " +
                         scratch("s").string());
  CHECK(schema.code == 2);
  CHECK(schema.output.find("/nonexistent/schema.json") != std::string::npos);

  const Run preset = run("train --fixture --preset no-such-model --out " + scratch("p").string());
  CHECK(preset.code == 2);
  CHECK(preset.output.find("ann-adagrad-20") != std::string::npos);
  CHECK(preset.output.find("proposed-adam-25") != std::string::npos);

  CHECK(run("frobnicate").code == 2);
  CHECK(run("train --fixture --label-mode ternary").code == 2);
  CHECK(run("evaluate --fixture").code == 2);
  CHECK(run("--help").code == 0);
}

TEST_CASE("divergence exits with 3") {
  botstack::ModelConfig c;
  c.name = "runaway";
  c.kind = botstack::ModelKind::ann;
  c.layers = 3;
  c.units = {64, 32, 1};
  c.activations = {botstack::Activation::relu};
  c.optimizer = botstack::OptimizerConfig::defaults(botstack::OptimizerKind::sgd);
  c.optimizer.learning_rate = 1e300;
  c.epochs = 5;
  const fs::path dir = scratch("diverge");
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json") << c.to_json().dump();
  const Run r = run("train --fixture --config " + (dir / "cfg.json").string() + " --out " + (dir / "out").string());
  CHECK(r.code == 3);
  CHECK(r.output.find("epoch") != std::string::npos);
  CHECK(r.output.find("batch") != std::string::npos);
}

TEST_CASE("training twice gives byte-identical model files") {
  const fs::path a = scratch("train_a"), b = scratch("train_b");
  REQUIRE(run("train --fixture --preset ann-adagrad-20 --preset rnn-adam-25 --seed 7 --out " + a.string()).code == 0);
  REQUIRE(run("train --fixture --preset ann-adagrad-20 --preset rnn-adam-25 --seed 7 --out " + b.string()).code == 0);
  for (const char* m : {"ann-adagrad-20", "rnn-adam-25"}) {
    INFO(m);
    const std::string ma = slurp(a / m / "model.bin");
    CHECK(!ma.empty());
    CHECK(ma == slurp(b / m / "model.bin"));
    const nlohmann::json ra = read_json(a / m / "train_report.json"), rb = read_json(b / m / "train_report.json");
    CHECK(ra["epochs"].size() == rb["epochs"].size());
    for (std::size_t e = 0; e < ra["epochs"].size(); ++e) CHECK(ra["epochs"][e]["loss"] == rb["epochs"][e]["loss"]);
  }
}

TEST_CASE("evaluate reproduces the training accuracy and prints six columns") {
  const fs::path dir = scratch("evaluate");
  REQUIRE(run("train --fixture --preset lstm-adamax-sigmoid-30 --out " + (dir / "train").string()).code == 0);
  const fs::path model = dir / "train" / "lstm-adamax-sigmoid-30" / "model.bin";
  const nlohmann::json report = read_json(dir / "train" / "lstm-adamax-sigmoid-30" / "train_report.json");

  const Run r = run("evaluate --fixture --subset train --model " + model.string() + " --out " + (dir / "ev").string());
  REQUIRE(r.code == 0);
  const nlohmann::json metrics = read_json(dir / "ev" / "metrics.json");
  for (const char* key : {"accuracy", "precision", "recall", "f1", "roc_auc"}) CHECK(metrics.contains(key));
  CHECK(std::abs(metrics["accuracy"].get<double>() - report["final_train_accuracy"].get<double>()) <= 1e-9);

  std::istringstream table(slurp(dir / "ev" / "metrics_table.txt"));
  std::string header, row;
  std::getline(table, header);
  std::getline(table, row);
  CHECK(header == botstack::kTableHeader);
  CHECK(std::count(header.begin(), header.end(), '\t') == 5);
  CHECK(std::count(row.begin(), row.end(), '\t') == 5);
  CHECK(row.rfind("30\t", 0) == 0);

  const Run again = run("evaluate --fixture --subset train --model " + model.string() + " --out " + (dir / "ev2").string());
  REQUIRE(again.code == 0);
  CHECK(slurp(dir / "ev" / "metrics.json") == slurp(dir / "ev2" / "metrics.json"));
}

TEST_CASE("evaluate rejects data of another width") {
  const fs::path dir = scratch("width");
  REQUIRE(run("train --fixture --preset ann-adam-20 --out " + (dir / "train").string()).code == 0);
  // Keep a single proto value so the encoded width shrinks.
  std::ifstream in(botstack::fixture_path());
  std::ofstream out(dir / "narrow.csv");
  std::string line;
  std::getline(in, line);
  out << line << "\n";
  int kept = 0;
  while (std::getline(in, line) && kept < 200) {
    if (line.find(",tcp,") == std::string::npos) continue;
    out << line << "\n";
    ++kept;
  }
  out.close();
  const Run r = run("evaluate --data " + (dir / "narrow.csv").string() + " --no-balance --model " +
                    (dir / "train" / "ann-adam-20" / "model.bin").string() + " --out " + (dir / "ev").string());
  CHECK(r.code == 2);
}

TEST_CASE("compare writes the comparison table") {
  const fs::path dir = scratch("compare");
  const Run r = run("compare --fixture --preset ann-adagrad-20 --preset ann-adam-20 --preset rnn-rmsprop-25 --out " +
                    dir.string());
  REQUIRE(r.code == 0);
  std::istringstream csv(slurp(dir / "comparison.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "Model,Classes,Accuracy,Precision,Recall,F1-Score");
  std::vector<double> accuracies;
  for (std::string line; std::getline(csv, line);) {
    if (line.empty()) continue;
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    std::getline(ss, cell, ',');
    CHECK(cell == "Binary class");
    std::getline(ss, cell, ',');
    accuracies.push_back(std::stod(cell));
  }
  CHECK(accuracies.size() == 3);
  CHECK(std::is_sorted(accuracies.rbegin(), accuracies.rend()));
  CHECK(fs::exists(dir / "run_config.json"));
}

TEST_CASE("identical configs compare identically") {
  botstack::ModelConfig c;
  c.name = "twin";
  c.kind = botstack::ModelKind::ann;
  c.layers = 2;
  c.units = {16, 1};
  c.epochs = 3;
  botstack::ModelConfig d = c;
  d.name = "twin-copy";
  const fs::path dir = scratch("twins");
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json") << nlohmann::json::array({c.to_json(), d.to_json()}).dump();
  REQUIRE(run("compare --fixture --config " + (dir / "cfg.json").string() + " --out " + (dir / "out").string()).code == 0);
  const nlohmann::json rows = read_json(dir / "out" / "comparison.json");
  REQUIRE(rows.is_array());
  REQUIRE(rows.size() == 2);
  auto metrics = [](nlohmann::json row) {
    row.erase("model");
    return row;
  };
  CHECK(metrics(rows[0]) == metrics(rows[1]));
}
