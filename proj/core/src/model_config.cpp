#include "botstack/model_config.hpp"

#include "botstack/error.hpp"

namespace botstack {

ModelKind parse_model_kind(std::string_view name) {
  static constexpr std::pair<std::string_view, ModelKind> table[] = {
      {"ann", ModelKind::ann},   {"cnn", ModelKind::cnn},       {"lstm", ModelKind::lstm},
      {"gru", ModelKind::gru},   {"rnn", ModelKind::rnn},       {"bilstm", ModelKind::bilstm},
      {"bigru", ModelKind::bigru}, {"stacked", ModelKind::stacked}};
  for (const auto& [n, k] : table) {
    if (n == name) return k;
  }
  throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::ann: return "ann";
    case ModelKind::cnn: return "cnn";
    case ModelKind::lstm: return "lstm";
    case ModelKind::gru: return "gru";
    case ModelKind::rnn: return "rnn";
    case ModelKind::bilstm: return "bilstm";
    case ModelKind::bigru: return "bigru";
    case ModelKind::stacked: return "stacked";
  }
  return "?";
}

bool is_recurrent(ModelKind kind) {
  return kind == ModelKind::lstm || kind == ModelKind::gru || kind == ModelKind::rnn || kind == ModelKind::bilstm ||
         kind == ModelKind::bigru;
}

Head parse_head(std::string_view name) {
  if (name == "sigmoid") return Head::sigmoid;
  if (name == "softmax") return Head::softmax;
  throw ConfigError("unknown head '" + std::string(name) + "' (expected sigmoid or softmax)");
}

std::string_view head_name(Head head) { return head == Head::sigmoid ? "sigmoid" : "softmax"; }

void ModelConfig::validate() const {
  const std::string who = "model '" + name + "': ";
  if (units.empty()) throw ConfigError(who + "unit stack is empty");
  for (std::size_t u : units) {
    if (u == 0) throw ConfigError(who + "zero-width layer in unit stack");
  }
  if (head == Head::sigmoid && head_width() != 1) {
    throw ConfigError(who + "sigmoid head needs a final width of 1, unit stack ends in " + std::to_string(head_width()));
  }
  if (head == Head::softmax && head_width() < 2) {
    throw ConfigError(who + "softmax head needs a final width of at least 2, unit stack ends in " +
                      std::to_string(head_width()));
  }
  if (activations.empty() || activations.size() > 2) throw ConfigError(who + "expected one or two activations");
  if (batch_size == 0) throw ConfigError(who + "batch size must be positive");
  if (!(optimizer.learning_rate > 0.0)) throw ConfigError(who + "learning rate must be positive");

  switch (kind) {
    case ModelKind::ann:
    case ModelKind::rnn:
    case ModelKind::lstm:
    case ModelKind::gru:
    case ModelKind::bilstm:
    case ModelKind::bigru:
      if (layers != units.size()) {
        throw ConfigError(who + std::to_string(layers) + " layers declared but the unit stack has " +
                          std::to_string(units.size()) + " entries");
      }
      if (is_recurrent(kind) && units.size() < 2) throw ConfigError(who + "recurrent models need a hidden layer");
      break;
    case ModelKind::cnn: {
      if (conv_channels.empty()) throw ConfigError(who + "cnn needs at least one conv layer");
      if (kernel == 0 || pool == 0) throw ConfigError(who + "kernel and pool sizes must be positive");
      const std::size_t expected = 2 * conv_channels.size() + units.size() - 1;
      if (layers != expected) {
        throw ConfigError(who + std::to_string(layers) + " layers declared but " + std::to_string(conv_channels.size()) +
                          " conv blocks and " + std::to_string(units.size()) + " units make " +
                          std::to_string(expected));
      }
      break;
    }
    case ModelKind::stacked:
      if (bases.size() < 2) throw ConfigError(who + "stacking needs at least two base models");
      if (folds < 2) throw ConfigError(who + "stacking needs at least two folds");
      for (const ModelConfig& b : bases) {
        if (b.kind == ModelKind::stacked) throw ConfigError(who + "nested stacking is not supported");
        if (b.head != head || b.head_width() != head_width()) {
          throw ConfigError(who + "base '" + b.name + "' has a different head");
        }
        b.validate();
      }
      break;
  }
}

nlohmann::json ModelConfig::to_json() const {
  nlohmann::json acts = nlohmann::json::array();
  for (Activation a : activations) acts.push_back(activation_name(a));
  nlohmann::json opt{{"kind", optimizer_name(optimizer.kind)},
                     {"learning_rate", optimizer.learning_rate},
                     {"beta1", optimizer.beta1},
                     {"beta2", optimizer.beta2},
                     {"rho", optimizer.rho},
                     {"epsilon", optimizer.epsilon}};
  opt["clip_norm"] = optimizer.clip_norm ? nlohmann::json(*optimizer.clip_norm) : nlohmann::json(nullptr);
  nlohmann::json j{{"name", name},
                   {"kind", model_kind_name(kind)},
                   {"layers", layers},
                   {"units", units},
                   {"activations", acts},
                   {"optimizer", opt},
                   {"epochs", epochs},
                   {"batch_size", batch_size},
                   {"head", head_name(head)},
                   {"seed", seed}};
  if (kind == ModelKind::cnn) {
    j["conv_channels"] = conv_channels;
    j["kernel"] = kernel;
    j["pool"] = pool;
  }
  if (kind == ModelKind::stacked) {
    j["folds"] = folds;
    nlohmann::json b = nlohmann::json::array();
    for (const ModelConfig& base : bases) b.push_back(base.to_json());
    j["bases"] = b;
  }
  return j;
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  try {
    ModelConfig c;
    c.name = j.value("name", std::string());
    c.kind = parse_model_kind(j.at("kind").get<std::string>());
    c.units = j.at("units").get<std::vector<std::size_t>>();
    if (c.units.empty()) throw ConfigError("model '" + c.name + "': unit stack is empty");
    c.layers = j.value("layers", c.kind == ModelKind::cnn ? 0 : c.units.size());
    c.activations.clear();
    if (j.contains("activations")) {
      for (const auto& a : j.at("activations")) c.activations.push_back(parse_activation(a.get<std::string>()));
    } else {
      c.activations.push_back(Activation::relu);
    }
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      const OptimizerKind kind = parse_optimizer(o.at("kind").get<std::string>());
      c.optimizer = OptimizerConfig::defaults(kind);
      c.optimizer.learning_rate = o.value("learning_rate", c.optimizer.learning_rate);
      c.optimizer.beta1 = o.value("beta1", c.optimizer.beta1);
      c.optimizer.beta2 = o.value("beta2", c.optimizer.beta2);
      c.optimizer.rho = o.value("rho", c.optimizer.rho);
      c.optimizer.epsilon = o.value("epsilon", c.optimizer.epsilon);
      if (o.contains("clip_norm") && !o.at("clip_norm").is_null()) c.optimizer.clip_norm = o.at("clip_norm").get<double>();
    }
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.head = parse_head(j.value("head", std::string(c.units.back() == 1 ? "sigmoid" : "softmax")));
    c.seed = j.value("seed", c.seed);
    c.conv_channels = j.value("conv_channels", c.conv_channels);
    c.kernel = j.value("kernel", c.kernel);
    c.pool = j.value("pool", c.pool);
    if (c.kind == ModelKind::cnn && !j.contains("layers")) c.layers = 2 * c.conv_channels.size() + c.units.size() - 1;
    c.folds = j.value("folds", c.folds);
    if (j.contains("bases")) {
      for (const auto& b : j.at("bases")) c.bases.push_back(from_json(b));
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model config: ") + e.what());
  }
}

bool operator==(const ModelConfig& a, const ModelConfig& b) { return a.to_json() == b.to_json(); }

}  // namespace botstack
