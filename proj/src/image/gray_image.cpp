#include "afrl/image/gray_image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "afrl/error.hpp"

namespace afrl::image {

namespace {

void check_dimensions(int width, int height) {
    if (width < 1 || height < 1) {
        throw ShapeError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                         std::to_string(height));
    }
}

}  // namespace

GrayImage::GrayImage(int width, int height, double value) : width_(width), height_(height) {
    check_dimensions(width, height);
    if (!std::isfinite(value)) {
        throw PreconditionError("image fill value must be finite");
    }
    pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), value);
}

GrayImage::GrayImage(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    check_dimensions(width, height);
    if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw ShapeError("pixel buffer holds " + std::to_string(pixels_.size()) + " values, expected " +
                         std::to_string(static_cast<std::size_t>(width) * height));
    }
    if (!std::all_of(pixels_.begin(), pixels_.end(), [](double v) { return std::isfinite(v); })) {
        throw PreconditionError("image intensities must be finite");
    }
}

double GrayImage::mean() const noexcept {
    double sum = 0.0;
    for (double v : pixels_) sum += v;
    return sum / static_cast<double>(pixels_.size());
}

GrayImage quantize_8bit(const GrayImage& img) {
    GrayImage out = img;
    for (double& v : out.pixels()) {
        v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
    }
    return out;
}

}  // namespace afrl::image
