#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace molrel {

// 64-bit FNV-1a; used for config and parameter-layout digests, not security.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::span<const double> values, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string to_hex(std::uint64_t value);

}  // namespace molrel
