#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace botstack {

enum class ColumnType { numeric, categorical };

struct ColumnSpec {
  std::string name;
  ColumnType type = ColumnType::numeric;
};

/// Column layout of a UNSW-NB15-style feature CSV.
///
/// `features` lists the model inputs in encoding order. The CSV header must
/// contain every feature plus the category and label columns; any other
/// columns (the partition files carry an `id`) are ignored. `classes` gives
/// the attack-category names in class-index order; `normal_class` is the one
/// that maps to binary label 0.
struct Schema {
  std::string name;
  std::vector<ColumnSpec> features;
  std::string category_column = "attack_cat";
  std::string label_column = "label";
  std::vector<std::string> classes;
  std::string normal_class = "Normal";

  std::size_t numeric_count() const;
  std::size_t categorical_count() const;
  /// Index of `name` in `classes`, or -1.
  int class_index(const std::string& name) const;

  static Schema load(const std::filesystem::path& path);
  static Schema from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// The ten UNSW-NB15 categories as spelled in the partition CSVs, in the
/// order Normal, Fuzzers, Backdoor, DoS, Exploits, Generic, Reconnaissance,
/// Analysis, Shellcode, Worms.
const std::vector<std::string>& unsw_nb15_classes();

/// Built-in copy of the UNSW-NB15 partition schema (42 features).
Schema unsw_nb15_schema();

}  // namespace botstack
