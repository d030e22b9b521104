#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace webtree {

/// 64-bit FNV-1a. Stable across platforms; used for observation and
/// trajectory digests in lookup tables and traces.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);

std::string digest_text(std::string_view data);

}  // namespace webtree
