#include "botstack/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "botstack/error.hpp"

namespace botstack {
namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& text, const std::string& column, std::size_t line) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError("column " + column + ": cannot parse '" + text + "' as a finite number", line);
  }
  return value;
}

}  // namespace

std::vector<std::size_t> RawDataset::category_counts() const {
  std::vector<std::size_t> counts(schema.classes.size(), 0);
  for (const Record& r : records) ++counts[static_cast<std::size_t>(r.category)];
  return counts;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        current += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(std::move(current)));
      current.clear();
    } else {
      current += ch;
    }
  }
  fields.push_back(trim(std::move(current)));
  return fields;
}

RawDataset load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file " + path.string());
  return parse_csv(in, schema);
}

RawDataset parse_csv(std::istream& in, const Schema& schema) {
  RawDataset ds;
  ds.schema = schema;

  std::string line;
  if (!std::getline(in, line)) throw SchemaError("data file is empty (no header line)");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  const std::vector<std::string> header = split_csv_line(line);
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i) position.emplace(header[i], i);

  auto column = [&](const std::string& name) {
    const auto it = position.find(name);
    if (it == position.end()) throw SchemaError("missing column '" + name + "' in data header");
    return it->second;
  };

  std::vector<std::size_t> numeric_cols, categorical_cols;
  std::vector<std::string> numeric_names;
  for (const ColumnSpec& c : schema.features) {
    if (c.type == ColumnType::numeric) {
      numeric_cols.push_back(column(c.name));
      numeric_names.push_back(c.name);
    } else {
      categorical_cols.push_back(column(c.name));
    }
  }
  const std::size_t category_col = column(schema.category_column);
  const std::size_t label_col = column(schema.label_column);
  const int normal = schema.class_index(schema.normal_class);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()),
                       line_no);
    }
    Record r;
    r.numeric.reserve(numeric_cols.size());
    for (std::size_t k = 0; k < numeric_cols.size(); ++k) {
      r.numeric.push_back(parse_number(fields[numeric_cols[k]], numeric_names[k], line_no));
    }
    r.categorical.reserve(categorical_cols.size());
    for (std::size_t col : categorical_cols) r.categorical.push_back(fields[col]);

    r.category = schema.class_index(fields[category_col]);
    if (r.category < 0) {
      throw ValidationError("unknown attack category '" + fields[category_col] + "' (line " + std::to_string(line_no) + ")");
    }
    const double label = parse_number(fields[label_col], schema.label_column, line_no);
    if (label != 0.0 && label != 1.0) throw ParseError("label must be 0 or 1", line_no);
    r.label = static_cast<int>(label);
    if ((r.category == normal) != (r.label == 0)) {
      throw ValidationError("category '" + fields[category_col] + "' disagrees with label " + std::to_string(r.label) +
                            " (line " + std::to_string(line_no) + ")");
    }
    ds.records.push_back(std::move(r));
  }
  return ds;
}

}  // namespace botstack
