#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>

#include "botstack/model.hpp"
#include "botstack/stacking.hpp"

namespace botstack {

/// Model file, integers little-endian:
///   "BNMD", u32 version,
///   u64 n + n bytes of JSON (config, input widths, model kind),
///   u64 tensor count, then per tensor u32 rank, rank x u64 extents and the
///   values as binary64,
///   u64 FNV-1a 64 of every preceding byte.
/// Stacked models store base tensors in base order, then the meta-learner's.
inline constexpr std::uint32_t kModelFormatVersion = 1;

using AnyModel = std::variant<Model, StackedModel>;

std::string serialize_model(const AnyModel& model);
/// IntegrityError for truncated, corrupt or checksum-failing bytes,
/// VersionError for an unsupported version.
AnyModel deserialize_model(const std::string& bytes);

void save_model(const AnyModel& model, const std::filesystem::path& path);
AnyModel load_model(const std::filesystem::path& path);

const ModelConfig& model_config(const AnyModel& model);
std::size_t model_input_width(const AnyModel& model);
std::uint64_t model_checksum(const AnyModel& model);
Tensor predict_proba(const AnyModel& model, const Tensor& x);
nlohmann::json model_summary(const AnyModel& model);

}  // namespace botstack
