#pragma once

#include <filesystem>

#include "botstack/tensor.hpp"

namespace botstack {

/// Flat binary matrix file, all integers little-endian:
///   bytes 0-3   magic "BSEM"
///   bytes 4-7   u32 version (1)
///   bytes 8-15  u64 rows N
///   bytes 16-23 u64 cols F
///   then N * F IEEE-754 binary64 values, row-major.
inline constexpr std::uint32_t kEncodedVersion = 1;

void write_encoded(const std::filesystem::path& path, const Tensor& matrix);
/// IntegrityError on bad magic or size, VersionError on an unknown version.
Tensor read_encoded(const std::filesystem::path& path);

}  // namespace botstack
