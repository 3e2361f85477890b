#include "botstack/schema.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "botstack/error.hpp"

namespace botstack {

std::size_t Schema::numeric_count() const {
  return static_cast<std::size_t>(
      std::count_if(features.begin(), features.end(), [](const ColumnSpec& c) { return c.type == ColumnType::numeric; }));
}

std::size_t Schema::categorical_count() const { return features.size() - numeric_count(); }

int Schema::class_index(const std::string& name) const {
  const auto it = std::find(classes.begin(), classes.end(), name);
  return it == classes.end() ? -1 : static_cast<int>(it - classes.begin());
}

Schema Schema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("schema file " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

Schema Schema::from_json(const nlohmann::json& j) {
  try {
    Schema s;
    s.name = j.value("name", "");
    s.category_column = j.value("category_column", "attack_cat");
    s.label_column = j.value("label_column", "label");
    s.normal_class = j.value("normal_class", "Normal");
    s.classes = j.value("classes", unsw_nb15_classes());
    for (const auto& c : j.at("columns")) {
      ColumnSpec spec;
      spec.name = c.at("name").get<std::string>();
      const std::string type = c.at("type").get<std::string>();
      if (type == "numeric") {
        spec.type = ColumnType::numeric;
      } else if (type == "categorical") {
        spec.type = ColumnType::categorical;
      } else {
        throw SchemaError("column " + spec.name + " has unknown type '" + type + "'");
      }
      s.features.push_back(std::move(spec));
    }
    std::set<std::string> seen;
    for (const auto& c : s.features) {
      if (!seen.insert(c.name).second) throw SchemaError("duplicate column " + c.name);
    }
    if (seen.count(s.category_column) || seen.count(s.label_column)) {
      throw SchemaError("label columns must not also be feature columns");
    }
    if (s.features.empty()) throw SchemaError("schema declares no feature columns");
    if (s.class_index(s.normal_class) < 0) throw SchemaError("normal class '" + s.normal_class + "' missing from classes");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed schema: ") + e.what());
  }
}

nlohmann::json Schema::to_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : features) {
    cols.push_back({{"name", c.name}, {"type", c.type == ColumnType::numeric ? "numeric" : "categorical"}});
  }
  return {{"name", name},
          {"columns", cols},
          {"category_column", category_column},
          {"label_column", label_column},
          {"classes", classes},
          {"normal_class", normal_class}};
}

const std::vector<std::string>& unsw_nb15_classes() {
  static const std::vector<std::string> names = {"Normal",  "Fuzzers",        "Backdoor", "DoS",       "Exploits",
                                                 "Generic", "Reconnaissance", "Analysis", "Shellcode", "Worms"};
  return names;
}

Schema unsw_nb15_schema() {
  static const char* const numeric_before[] = {"dur"};
  static const char* const categorical[] = {"proto", "service", "state"};
  static const char* const numeric_after[] = {
      "spkts",         "dpkts",         "sbytes",           "dbytes",           "rate",           "sttl",
      "dttl",          "sload",         "dload",            "sloss",            "dloss",          "sinpkt",
      "dinpkt",        "sjit",          "djit",             "swin",             "stcpb",          "dtcpb",
      "dwin",          "tcprtt",        "synack",           "ackdat",           "smean",          "dmean",
      "trans_depth",   "response_body_len", "ct_srv_src",   "ct_state_ttl",     "ct_dst_ltm",     "ct_src_dport_ltm",
      "ct_dst_sport_ltm", "ct_dst_src_ltm", "is_ftp_login", "ct_ftp_cmd",       "ct_flw_http_mthd", "ct_src_ltm",
      "ct_srv_dst",    "is_sm_ips_ports"};
  Schema s;
  s.name = "UNSW-NB15 partition";
  for (const char* n : numeric_before) s.features.push_back({n, ColumnType::numeric});
  for (const char* n : categorical) s.features.push_back({n, ColumnType::categorical});
  for (const char* n : numeric_after) s.features.push_back({n, ColumnType::numeric});
  s.classes = unsw_nb15_classes();
  return s;
}

}  // namespace botstack
