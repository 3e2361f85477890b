// Writes the bundled synthetic fixture (UNSW-NB15 partition layout) and the
// matching schema file.
//
//   make_fixture <fixture.csv> <schema.json> [seed]

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "botstack/rng.hpp"
#include "botstack/schema.hpp"

namespace {

using botstack::ColumnType;
using botstack::Rng;

struct ClassPlan {
  const char* name;
  int rows;
};

// Skewed on purpose so that balancing has work to do.
const ClassPlan kPlan[] = {
    {"Normal", 300},   {"Generic", 180},       {"Exploits", 150}, {"Fuzzers", 100}, {"DoS", 80},
    {"Reconnaissance", 70}, {"Analysis", 40}, {"Backdoor", 35},  {"Shellcode", 30}, {"Worms", 15},
};

const std::vector<std::string> kProto = {"tcp", "udp", "arp", "ospf", "unas"};
const std::vector<std::string> kService = {"-", "dns", "http", "ftp", "smtp", "ssh"};
const std::vector<std::string> kState = {"FIN", "INT", "CON", "REQ", "RST"};

bool is_flag(const std::string& name) { return name.rfind("is_", 0) == 0; }

bool is_count(const std::string& name) {
  return name == "spkts" || name == "dpkts" || name == "sbytes" || name == "dbytes" || name == "sttl" ||
         name == "dttl" || name == "swin" || name == "dwin" || name == "trans_depth" || name.rfind("ct_", 0) == 0;
}

std::string fmt(double v, bool integral) {
  char buf[64];
  if (integral) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.6f", v);
  }
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: make_fixture <fixture.csv> <schema.json> [seed]\n";
    return 2;
  }
  const std::uint64_t seed = argc > 3 ? std::stoull(argv[3]) : 20240611ULL;
  const botstack::Schema schema = botstack::unsw_nb15_schema();

  std::vector<std::string> numeric;
  for (const auto& c : schema.features) {
    if (c.type == ColumnType::numeric) numeric.push_back(c.name);
  }

  // Per-class location shifts and categorical preferences.
  Rng plan_rng(botstack::derive_seed(seed, {1}));
  const std::size_t classes = std::size(kPlan);
  std::vector<double> scale(numeric.size());
  for (double& s : scale) s = std::exp(plan_rng.uniform(0.0, 6.0));
  std::vector<std::vector<double>> shift(classes, std::vector<double>(numeric.size()));
  for (auto& row : shift) {
    for (double& s : row) s = plan_rng.uniform(-1.5, 1.5);
  }
  std::vector<std::size_t> proto_pref(classes), service_pref(classes), state_pref(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    proto_pref[c] = plan_rng.below(kProto.size());
    service_pref[c] = plan_rng.below(kService.size());
    state_pref[c] = plan_rng.below(kState.size());
  }

  struct Row {
    std::size_t cls;
    std::vector<std::string> cells;
  };
  std::vector<Row> rows;
  Rng rng(botstack::derive_seed(seed, {2}));
  for (std::size_t c = 0; c < classes; ++c) {
    for (int k = 0; k < kPlan[c].rows; ++k) {
      Row r{c, {}};
      auto pick = [&](const std::vector<std::string>& values, std::size_t pref) {
        return rng.uniform() < 0.65 ? values[pref] : values[rng.below(values.size())];
      };
      const std::string proto = pick(kProto, proto_pref[c]);
      const std::string service = pick(kService, service_pref[c]);
      const std::string state = pick(kState, state_pref[c]);
      std::size_t num = 0;
      for (const auto& col : schema.features) {
        if (col.type == ColumnType::categorical) {
          r.cells.push_back(col.name == "proto" ? proto : col.name == "service" ? service : state);
          continue;
        }
        const std::string& name = numeric[num];
        double v;
        if (is_flag(name)) {
          v = rng.uniform() < 1.0 / (1.0 + std::exp(-2.0 * shift[c][num])) ? 1.0 : 0.0;
        } else {
          v = scale[num] * std::exp(0.8 * shift[c][num] + 0.35 * rng.normal());
          if (is_count(name)) v = std::round(v);
        }
        r.cells.push_back(fmt(v, is_flag(name) || is_count(name)));
        ++num;
      }
      rows.push_back(std::move(r));
    }
  }
  rng.shuffle(rows);

  std::ofstream csv(argv[1], std::ios::binary | std::ios::trunc);
  if (!csv) {
    std::cerr << "cannot write " << argv[1] << "\n";
    return 2;
  }
  csv << "id";
  for (const auto& col : schema.features) csv << "," << col.name;
  csv << ",attack_cat,label\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv << (i + 1);
    for (const auto& cell : rows[i].cells) csv << "," << cell;
    csv << "," << kPlan[rows[i].cls].name << "," << (rows[i].cls == 0 ? 0 : 1) << "\n";
  }

  std::ofstream js(argv[2], std::ios::binary | std::ios::trunc);
  if (!js) {
    std::cerr << "cannot write " << argv[2] << "\n";
    return 2;
  }
  js << schema.to_json().dump(2) << "\n";
  std::cout << "wrote " << rows.size() << " rows to " << argv[1] << "\n";
  return 0;
}
