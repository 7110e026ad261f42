#pragma once

#include <filesystem>
#include <vector>

#include "taillight/common.hpp"

namespace taillight {

/// Loads a PNG or JPEG as 8-bit RGB; grayscale inputs are promoted by
/// channel replication. Throws DataError on unreadable files.
Image8 load_image(const std::filesystem::path& path);

/// Writes PNG or JPEG depending on the extension (.png / .jpg / .jpeg).
void save_image(const std::filesystem::path& path, const Image8& img);

/// In-memory JPEG encode/decode round trip at the given quality (1-100).
Image8 jpeg_roundtrip(const Image8& img, int quality);

}  // namespace taillight
