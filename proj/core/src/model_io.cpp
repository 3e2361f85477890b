#include "botstack/model_io.hpp"

#include "botstack/binary_io.hpp"
#include "botstack/checksum.hpp"
#include "botstack/error.hpp"

namespace botstack {
namespace {

void put_tensor(binio::Writer& w, const Tensor& t) {
  w.u32(static_cast<std::uint32_t>(t.rank()));
  for (std::size_t e : t.shape()) w.u64(e);
  for (double v : t.data()) w.f64(v);
}

Tensor get_tensor(binio::Reader& r) {
  const std::uint32_t rank = r.u32();
  if (rank == 0 || rank > 8) throw IntegrityError("implausible tensor rank " + std::to_string(rank));
  Shape shape(rank);
  std::uint64_t count = 1;
  for (auto& e : shape) {
    e = r.u64();
    if (e != 0 && count > r.remaining() / 8 / e) throw IntegrityError("tensor extents exceed the file size");
    count *= e;
  }
  std::vector<double> values(count);
  for (double& v : values) v = r.f64();
  return Tensor(std::move(shape), std::move(values));
}

}  // namespace

std::string serialize_model(const AnyModel& model) {
  nlohmann::json header;
  std::vector<const Parameter*> tensors;
  if (const auto* m = std::get_if<Model>(&model)) {
    header = {{"kind", "base"}, {"config", m->config().to_json()}, {"input_width", m->input_width()}};
    for (const Parameter& p : m->parameters()) tensors.push_back(&p);
  } else {
    const auto& s = std::get<StackedModel>(model);
    header = {{"kind", "stacked"},
              {"config", s.config().to_json()},
              {"input_width", s.input_width()},
              {"meta_config", s.meta().config().to_json()},
              {"meta_input_width", s.meta().input_width()}};
    for (const Model& b : s.bases()) {
      for (const Parameter& p : b.parameters()) tensors.push_back(&p);
    }
    for (const Parameter& p : s.meta().parameters()) tensors.push_back(&p);
  }
  const std::string text = header.dump();

  binio::Writer w;
  w.text("BNMD");
  w.u32(kModelFormatVersion);
  w.u64(text.size());
  w.text(text);
  w.u64(tensors.size());
  for (const Parameter* p : tensors) put_tensor(w, p->value);
  const std::uint64_t sum = fnv1a64(std::string_view(w.buffer()));
  w.u64(sum);
  return w.buffer();
}

AnyModel deserialize_model(const std::string& bytes) {
  if (bytes.size() < 8 + 8 + 8 + 8) throw IntegrityError("model file is truncated");
  binio::Reader r(bytes);
  if (r.text(4) != "BNMD") throw IntegrityError("not a model file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    throw VersionError("model file version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kModelFormatVersion) + ")");
  }
  const std::string_view body(bytes.data(), bytes.size() - 8);
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + bytes.size() - 8, 8);
  if (fnv1a64(body) != stored) throw IntegrityError("model file checksum mismatch");

  binio::Reader in(body);
  in.text(8);
  const std::uint64_t len = in.u64();
  if (len > in.remaining()) throw IntegrityError("model header is truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(in.text(len));
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("model header is not valid JSON: ") + e.what());
  }
  const std::uint64_t count = in.u64();
  if (count > in.remaining() / 12) throw IntegrityError("tensor count exceeds the file size");
  std::vector<Tensor> tensors;
  tensors.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) tensors.push_back(get_tensor(in));
  if (in.remaining() != 0) throw IntegrityError("unexpected bytes after the tensors");

  try {
    const ModelConfig config = ModelConfig::from_json(header.at("config"));
    const std::size_t width = header.at("input_width").get<std::size_t>();
    if (header.at("kind") == "base") return Model(config, width, std::move(tensors));

    std::vector<Model> bases;
    std::size_t next = 0;
    auto take = [&](const ModelConfig& cfg, std::size_t in_width) {
      const std::size_t k = Model(cfg, in_width).parameters().size();
      if (next + k > tensors.size()) throw IntegrityError("model file has too few tensors");
      const auto first = tensors.begin() + static_cast<std::ptrdiff_t>(next);
      std::vector<Tensor> vals(std::make_move_iterator(first), std::make_move_iterator(first + static_cast<std::ptrdiff_t>(k)));
      next += k;
      return Model(cfg, in_width, std::move(vals));
    };
    for (const ModelConfig& b : config.bases) bases.push_back(take(b, width));
    Model meta = take(ModelConfig::from_json(header.at("meta_config")), header.at("meta_input_width").get<std::size_t>());
    if (next != tensors.size()) throw IntegrityError("model file has surplus tensors");
    return StackedModel(config, std::move(bases), std::move(meta));
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("model header is incomplete: ") + e.what());
  } catch (const ConfigError& e) {
    throw IntegrityError(std::string("model header holds an invalid config: ") + e.what());
  }
}

void save_model(const AnyModel& model, const std::filesystem::path& path) {
  binio::write_file(path.string(), serialize_model(model));
}

AnyModel load_model(const std::filesystem::path& path) { return deserialize_model(binio::read_file(path.string())); }

const ModelConfig& model_config(const AnyModel& model) {
  return std::visit([](const auto& m) -> const ModelConfig& { return m.config(); }, model);
}

std::size_t model_input_width(const AnyModel& model) {
  return std::visit([](const auto& m) { return m.input_width(); }, model);
}

std::uint64_t model_checksum(const AnyModel& model) {
  return std::visit([](const auto& m) { return m.checksum(); }, model);
}

Tensor predict_proba(const AnyModel& model, const Tensor& x) {
  return std::visit([&](const auto& m) { return m.predict_proba(x); }, model);
}

nlohmann::json model_summary(const AnyModel& model) {
  return std::visit([](const auto& m) { return m.summary_json(); }, model);
}

}  // namespace botstack
