#pragma once

#include "mister/image.hpp"

#include <filesystem>

namespace mister {

enum class ImageFormat { pgm, png };

/// Picks the format from the file extension (.pgm or .png).
ImageFormat format_from_path(const std::filesystem::path& path);

/// Reads an 8-bit grayscale binary PGM (P5) or PNG. Values are the raw bytes.
Image load_image(const std::filesystem::path& path, ImageFormat format);
Image load_image(const std::filesystem::path& path);

/// Rounds half away from zero, clamps to [0, 255] and writes 8-bit grayscale.
void save_image(const Image& img, const std::filesystem::path& path, ImageFormat format);
void save_image(const Image& img, const std::filesystem::path& path);

/// The byte save_image stores for an intensity.
unsigned char quantize(double value);

}  // namespace mister
