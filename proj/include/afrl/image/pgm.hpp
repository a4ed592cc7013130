#pragma once

#include <filesystem>

#include "afrl/image/gray_image.hpp"

namespace afrl::image {

/// Reads a binary (P5) PGM with maxval 255; bytes are divided by 255.
/// Throws FormatError on malformed files.
GrayImage read_pgm(const std::filesystem::path& path);

/// Writes an 8-bit binary PGM. Intensities are clamped to [0,1] and rounded to
/// the nearest 1/255, so images already on that lattice round-trip bitwise.
void write_pgm(const GrayImage& img, const std::filesystem::path& path);

}  // namespace afrl::image
