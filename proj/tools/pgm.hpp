#pragma once

#include <filesystem>

#include "mkot/image.hpp"

namespace mkot::tools {

// 8-bit PGM reader (P5 binary and P2 ascii), intensities scaled to [0, 1]
// by the header maxval. Raises mkot::Error on malformed input.
Image read_pgm(const std::filesystem::path& path);

}  // namespace mkot::tools
