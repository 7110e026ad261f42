#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

namespace taillight {

/// SHA-256 of a byte range, as lowercase hex.
std::string sha256_hex(const void* data, std::size_t len);

/// SHA-256 of a file's contents, as lowercase hex.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace taillight
