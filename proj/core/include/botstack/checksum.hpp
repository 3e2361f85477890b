#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>

namespace botstack {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

/// 64-bit FNV-1a, chainable through `state`.
std::uint64_t fnv1a64(std::span<const std::byte> bytes, std::uint64_t state = kFnvOffset);
std::uint64_t fnv1a64(std::string_view text, std::uint64_t state = kFnvOffset);
std::uint64_t fnv1a64(std::span<const double> values, std::uint64_t state = kFnvOffset);
std::uint64_t file_checksum(const std::filesystem::path& path);

std::string hex64(std::uint64_t value);

}  // namespace botstack
