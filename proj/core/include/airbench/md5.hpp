#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace airbench {

// RFC 1321 MD5. Used only as a stable per-index hash for augmentation
// bookkeeping, never for anything security-sensitive.
std::array<uint8_t, 16> md5(std::string_view data);

// Lowercase 32-character hex digest.
std::string md5_hex(std::string_view data);

} // namespace airbench
