#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "botstack/schema.hpp"

namespace botstack {

struct Record {
  std::vector<double> numeric;           // numeric features in schema order
  std::vector<std::string> categorical;  // categorical features in schema order
  int category = 0;                      // index into Schema::classes
  int label = 0;                         // 0 normal, 1 attack
};

/// Parsed rows of a feature CSV. The category of every record is one of the
/// schema classes and the normal class holds exactly the label-0 rows.
struct RawDataset {
  Schema schema;
  std::vector<Record> records;

  std::size_t size() const noexcept { return records.size(); }
  std::vector<std::size_t> category_counts() const;
};

/// Reads a comma-separated file whose first line is the header. Fields may be
/// double-quoted. Surrounding whitespace is trimmed from every field.
///
/// Errors: SchemaError for a missing column (named), ParseError with the
/// 1-based line number for malformed rows or unparseable numbers,
/// ValidationError for unknown categories or category/label disagreement.
RawDataset load_csv(const std::filesystem::path& path, const Schema& schema);
RawDataset parse_csv(std::istream& in, const Schema& schema);

/// Splits one CSV line into fields.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace botstack
