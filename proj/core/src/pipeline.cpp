#include "botstack/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "botstack/error.hpp"
#include "botstack/rng.hpp"

namespace botstack {

LabelMode parse_label_mode(std::string_view name) {
  if (name == "binary") return LabelMode::binary;
  if (name == "multiclass") return LabelMode::multiclass;
  throw ConfigError("unknown label mode '" + std::string(name) + "' (expected binary or multiclass)");
}

std::string_view label_mode_name(LabelMode mode) { return mode == LabelMode::binary ? "binary" : "multiclass"; }

// ---------------------------------------------------------------------------

void CategoricalEncoder::fit(const RawDataset& ds, std::span<const std::size_t> rows) {
  if (rows.empty()) throw UsageError("categorical encoder needs at least one fit row");
  columns_.clear();
  for (const ColumnSpec& c : ds.schema.features) {
    if (c.type == ColumnType::categorical) columns_.push_back(c.name);
  }
  categories_.assign(columns_.size(), {});
  for (std::size_t k = 0; k < columns_.size(); ++k) {
    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t r : rows) {
      const std::string& v = ds.records.at(r).categorical[k];
      if (seen.emplace(v, seen.size()).second) categories_[k].push_back(v);
    }
  }
}

std::size_t CategoricalEncoder::width() const noexcept {
  std::size_t w = 0;
  for (const auto& c : categories_) w += c.size();
  return w;
}

void CategoricalEncoder::encode(std::size_t column, const std::string& value, std::span<double> out) const {
  const auto& cats = categories_.at(column);
  for (std::size_t i = 0; i < cats.size(); ++i) out[i] = cats[i] == value ? 1.0 : 0.0;
}

std::optional<std::string> CategoricalEncoder::decode(std::size_t column, std::span<const double> block) const {
  const auto& cats = categories_.at(column);
  if (block.size() != cats.size()) throw DimensionError("one-hot block width does not match column " + columns_[column]);
  for (std::size_t i = 0; i < cats.size(); ++i) {
    if (block[i] == 1.0) return cats[i];
  }
  return std::nullopt;
}

nlohmann::json CategoricalEncoder::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t k = 0; k < columns_.size(); ++k) j[columns_[k]] = categories_[k];
  return nlohmann::json{{"columns", columns_}, {"categories", j}};
}

CategoricalEncoder CategoricalEncoder::from_json(const nlohmann::json& j) {
  CategoricalEncoder e;
  e.columns_ = j.at("columns").get<std::vector<std::string>>();
  for (const auto& c : e.columns_) e.categories_.push_back(j.at("categories").at(c).get<std::vector<std::string>>());
  return e;
}

// ---------------------------------------------------------------------------

void Normalizer::fit(const Tensor& x, std::span<const std::size_t> rows) {
  if (rows.empty()) throw UsageError("normalizer needs at least one fit row");
  const std::size_t f = x.cols();
  mean_.assign(f, 0.0);
  stddev_.assign(f, 0.0);
  for (std::size_t r : rows) {
    const auto row = x.row(r);
    for (std::size_t j = 0; j < f; ++j) mean_[j] += row[j];
  }
  for (double& m : mean_) m /= static_cast<double>(rows.size());
  for (std::size_t r : rows) {
    const auto row = x.row(r);
    for (std::size_t j = 0; j < f; ++j) {
      const double d = row[j] - mean_[j];
      stddev_[j] += d * d;
    }
  }
  for (double& s : stddev_) s = std::sqrt(s / static_cast<double>(rows.size()));
}

void Normalizer::apply(Tensor& x) const {
  if (x.cols() != mean_.size()) {
    throw DimensionError("normalizer fitted on " + std::to_string(mean_.size()) + " columns, got " +
                         std::to_string(x.cols()));
  }
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = x.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - mean_[j]) / (stddev_[j] + kEpsilon);
  }
}

nlohmann::json Normalizer::to_json() const { return {{"mean", mean_}, {"stddev", stddev_}}; }

Normalizer Normalizer::from_json(const nlohmann::json& j) {
  Normalizer n;
  n.mean_ = j.at("mean").get<std::vector<double>>();
  n.stddev_ = j.at("stddev").get<std::vector<double>>();
  if (n.mean_.size() != n.stddev_.size()) throw ConfigError("normalizer mean/stddev length mismatch");
  return n;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> EncodedMatrix::counts() const {
  std::vector<std::size_t> c(class_count, 0);
  for (int k : classes) ++c[static_cast<std::size_t>(k)];
  return c;
}

EncodedMatrix EncodedMatrix::select(std::span<const std::size_t> rows) const {
  EncodedMatrix out;
  out.feature_names = feature_names;
  out.mode = mode;
  out.class_count = class_count;
  const std::size_t f = x.cols(), t = targets.cols();
  std::vector<double> xs, ys;
  xs.reserve(rows.size() * f);
  ys.reserve(rows.size() * t);
  for (std::size_t r : rows) {
    if (r >= this->rows()) throw UsageError("row index " + std::to_string(r) + " out of range");
    const auto xr = x.row(r);
    const auto yr = targets.row(r);
    xs.insert(xs.end(), xr.begin(), xr.end());
    ys.insert(ys.end(), yr.begin(), yr.end());
    out.classes.push_back(classes[r]);
    out.origin.push_back(origin[r]);
  }
  out.x = Tensor({rows.size(), f}, std::move(xs));
  out.targets = Tensor({rows.size(), t}, std::move(ys));
  return out;
}

Tensor make_targets(std::span<const int> classes, LabelMode mode, std::size_t class_count) {
  if (mode == LabelMode::binary) {
    Tensor y({classes.size(), 1});
    for (std::size_t i = 0; i < classes.size(); ++i) y[i] = classes[i];
    return y;
  }
  Tensor y({classes.size(), class_count});
  for (std::size_t i = 0; i < classes.size(); ++i) y.set(i, static_cast<std::size_t>(classes[i]), 1.0);
  return y;
}

std::vector<int> record_classes(const RawDataset& ds, LabelMode mode) {
  std::vector<int> out;
  out.reserve(ds.size());
  for (const Record& r : ds.records) out.push_back(mode == LabelMode::binary ? r.label : r.category);
  return out;
}

std::vector<std::string> class_names(const Schema& schema, LabelMode mode) {
  if (mode == LabelMode::binary) return {"0", "1"};
  return schema.classes;
}

// ---------------------------------------------------------------------------

SplitIndices split(std::span<const int> classes, double test_fraction, std::uint64_t seed, bool stratified) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw UsageError("test fraction must lie in (0, 1), got " + std::to_string(test_fraction));
  }
  Rng rng(derive_seed(seed, {0x5b1u}));
  std::vector<char> is_test(classes.size(), 0);
  if (stratified) {
    int max_class = -1;
    for (int c : classes) max_class = std::max(max_class, c);
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(max_class + 1));
    for (std::size_t i = 0; i < classes.size(); ++i) members[static_cast<std::size_t>(classes[i])].push_back(i);
    for (auto& m : members) {
      rng.shuffle(m);
      const auto take = static_cast<std::size_t>(std::llround(static_cast<double>(m.size()) * test_fraction));
      for (std::size_t k = 0; k < take; ++k) is_test[m[k]] = 1;
    }
  } else {
    std::vector<std::size_t> all(classes.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    rng.shuffle(all);
    const auto take = static_cast<std::size_t>(std::llround(static_cast<double>(all.size()) * test_fraction));
    for (std::size_t k = 0; k < take; ++k) is_test[all[k]] = 1;
  }
  SplitIndices out;
  for (std::size_t i = 0; i < classes.size(); ++i) (is_test[i] ? out.test : out.train).push_back(i);
  return out;
}

std::vector<std::size_t> balance_plan(std::span<const int> classes, std::span<const std::string> names,
                                      std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> members(names.size());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto c = static_cast<std::size_t>(classes[i]);
    if (c >= names.size()) throw ValidationError("class index " + std::to_string(c) + " out of range");
    members[c].push_back(i);
  }
  std::size_t majority = 0;
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (members[c].empty()) throw ValidationError("cannot balance: class '" + names[c] + "' has no rows");
    majority = std::max(majority, members[c].size());
  }
  std::vector<std::size_t> plan(classes.size());
  for (std::size_t i = 0; i < plan.size(); ++i) plan[i] = i;
  Rng rng(derive_seed(seed, {0xba1u}));
  for (const auto& m : members) {
    for (std::size_t k = m.size(); k < majority; ++k) plan.push_back(m[rng.below(m.size())]);
  }
  return plan;
}

EncodedMatrix balance(const EncodedMatrix& m, std::span<const std::string> names, std::uint64_t seed) {
  if (names.size() != m.class_count) throw UsageError("class name count does not match the matrix");
  const std::vector<std::size_t> plan = balance_plan(m.classes, names, seed);
  if (plan.size() == m.rows()) return m;
  return m.select(plan);
}

nlohmann::json PipelineConfig::to_json() const {
  return {{"label_mode", label_mode_name(mode)},
          {"test_fraction", test_fraction},
          {"stratified", stratified},
          {"balance", balance},
          {"seed", seed}};
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig c;
  c.mode = parse_label_mode(j.value("label_mode", std::string("binary")));
  c.test_fraction = j.value("test_fraction", c.test_fraction);
  c.stratified = j.value("stratified", c.stratified);
  c.balance = j.value("balance", c.balance);
  c.seed = j.value("seed", c.seed);
  return c;
}

// ---------------------------------------------------------------------------

EncodedMatrix encode(const RawDataset& ds, const CategoricalEncoder& encoder, LabelMode mode) {
  EncodedMatrix m;
  m.mode = mode;
  m.class_count = mode == LabelMode::binary ? 2 : ds.schema.classes.size();

  std::size_t cat = 0;
  for (const ColumnSpec& c : ds.schema.features) {
    if (c.type == ColumnType::numeric) {
      m.feature_names.push_back(c.name);
    } else {
      for (const std::string& v : encoder.categories().at(cat)) m.feature_names.push_back(c.name + "=" + v);
      ++cat;
    }
  }
  if (cat != encoder.categories().size()) throw SchemaError("encoder was fitted on a different schema");

  const std::size_t n = ds.size(), f = m.feature_names.size();
  m.x = Tensor({n, f});
  for (std::size_t i = 0; i < n; ++i) {
    const Record& r = ds.records[i];
    auto row = m.x.row(i);
    std::size_t col = 0, num = 0, k = 0;
    for (const ColumnSpec& c : ds.schema.features) {
      if (c.type == ColumnType::numeric) {
        row[col++] = r.numeric[num++];
      } else {
        const std::size_t w = encoder.categories()[k].size();
        encoder.encode(k, r.categorical[k], row.subspan(col, w));
        col += w;
        ++k;
      }
    }
  }
  m.classes = record_classes(ds, mode);
  m.targets = make_targets(m.classes, mode, m.class_count);
  m.origin.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.origin[i] = i;
  return m;
}

PreparedData prepare(const RawDataset& ds, const PipelineConfig& config) {
  PreparedData out;
  const std::vector<int> classes = record_classes(ds, config.mode);
  out.split = split(classes, config.test_fraction, config.seed, config.stratified);
  if (out.split.train.empty()) throw ValidationError("training split is empty");

  out.encoder.fit(ds, out.split.train);
  EncodedMatrix all = encode(ds, out.encoder, config.mode);
  out.normalizer.fit(all.x, out.split.train);
  out.normalizer.apply(all.x);
  if (!all_finite(all.x)) throw NumericError("encoded features contain non-finite values");

  out.train = all.select(out.split.train);
  out.test = all.select(out.split.test);
  if (config.balance) {
    const std::vector<std::string> names = class_names(ds.schema, config.mode);
    out.train = balance(out.train, names, config.seed);
  }
  return out;
}

}  // namespace botstack
