#pragma once

#include <cstdint>

#include "afrl/image/gray_image.hpp"

namespace afrl::scan {

/// Procedural stand-in for an in-focus source photograph: multi-octave value
/// noise overlaid with hard-edged ellipses and strokes, rescaled to [0.05,0.95]
/// and quantized to 8 bits. Deterministic in `seed`.
image::GrayImage synthesize_texture(int width, int height, std::uint64_t seed);

}  // namespace afrl::scan
