#pragma once

#include <filesystem>

#include "cbca/image.hpp"

namespace cbca {

// Binary PPM (P6, maxval 255) and 8-bit PNG (gray, RGB, RGBA; alpha dropped).
// The format is chosen by file extension: .ppm or .png.
Image read_image(const std::filesystem::path& path);
void write_ppm(const Image& rgb, const std::filesystem::path& path);

bool is_image_file(const std::filesystem::path& path);

}  // namespace cbca
