#include "molrel/core/artifact.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "molrel/core/digest.hpp"
#include "molrel/core/error.hpp"

namespace molrel {
namespace {

static_assert(std::endian::native == std::endian::little, "artifact payloads are stored little-endian");

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw DataError(path.string() + ": truncated artifact");
  return value;
}

}  // namespace

void write_artifact(const std::filesystem::path& path, const Artifact& artifact) {
  if (artifact.magic.size() != 8) throw Error("artifact magic must be 8 bytes");
  nlohmann::json header = artifact.header;
  header["payload_digest"] = to_hex(fnv1a64(std::span<const double>(artifact.payload)));
  const std::string text = header.dump();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(artifact.magic.data(), 8);
  put<std::uint32_t>(out, kArtifactVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put<std::uint64_t>(out, artifact.payload.size());
  out.write(reinterpret_cast<const char*>(artifact.payload.data()),
            static_cast<std::streamsize>(artifact.payload.size() * sizeof(double)));
  if (!out) throw DataError("error writing " + path.string());
}

Artifact read_artifact(const std::filesystem::path& path, std::string_view expected_magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  Artifact a;
  a.magic.resize(8);
  if (!in.read(a.magic.data(), 8)) throw DataError(path.string() + ": truncated artifact");
  if (a.magic != expected_magic) {
    throw DataError(path.string() + ": expected a '" + std::string(expected_magic) + "' file, found '" + a.magic + "'");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kArtifactVersion) throw DataError(path.string() + ": unsupported version " + std::to_string(version));
  const auto header_size = get<std::uint64_t>(in, path);
  std::string text(header_size, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_size))) throw DataError(path.string() + ": truncated header");
  try {
    a.header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": bad header: " + e.what());
  }
  const auto count = get<std::uint64_t>(in, path);
  a.payload.resize(count);
  if (!in.read(reinterpret_cast<char*>(a.payload.data()), static_cast<std::streamsize>(count * sizeof(double)))) {
    throw DataError(path.string() + ": truncated payload");
  }
  const std::string digest = to_hex(fnv1a64(std::span<const double>(a.payload)));
  if (a.header.value("payload_digest", std::string{}) != digest) throw DataError(path.string() + ": payload digest mismatch");
  return a;
}

}  // namespace molrel
