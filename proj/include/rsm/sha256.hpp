// sha256.hpp — minimal SHA-256 for content-hash cache keys.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace rsm::util {

/// 64-character lowercase hex digest.
std::string sha256_hex(std::string_view data);

} // namespace rsm::util
