#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace molrel {

/// Binary record: 8-byte magic, u32 format version, u64 header length, JSON
/// header, u64 value count, then raw little-endian f64 values. The writer adds
/// "payload_digest" (FNV-1a of the values) to the header and the reader checks it.
struct Artifact {
  std::string magic;  // exactly 8 characters
  nlohmann::json header;
  std::vector<double> payload;
};

inline constexpr std::uint32_t kArtifactVersion = 1;

void write_artifact(const std::filesystem::path& path, const Artifact& artifact);
/// Throws DataError on a short file, wrong magic or version, or digest mismatch.
Artifact read_artifact(const std::filesystem::path& path, std::string_view expected_magic);

}  // namespace molrel
