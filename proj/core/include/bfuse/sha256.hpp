#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bfuse {

// SHA-256 of a byte buffer, lowercase hex. Self-contained (FIPS 180-4).
std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_hex(const std::vector<std::uint8_t>& bytes);

// Digest of a file's contents; throws IoError if unreadable.
std::string sha256_file(const std::string& path);

}  // namespace bfuse
