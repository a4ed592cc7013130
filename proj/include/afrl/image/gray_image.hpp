#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace afrl::image {

/// Single-channel raster with row-major real intensities, nominally in [0,1].
///
/// Dimensions are fixed at construction; an image always holds at least one
/// pixel and every stored intensity is finite.
class GrayImage {
public:
    /// Creates a width x height image filled with `value`.
    GrayImage(int width, int height, double value = 0.0);

    /// Adopts `pixels` (row-major). Throws ShapeError on a size mismatch and
    /// PreconditionError on non-finite intensities.
    GrayImage(int width, int height, std::vector<double> pixels);

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] std::size_t size() const noexcept { return pixels_.size(); }

    [[nodiscard]] double at(int x, int y) const noexcept { return pixels_[index(x, y)]; }
    double& at(int x, int y) noexcept { return pixels_[index(x, y)]; }

    [[nodiscard]] std::span<const double> pixels() const noexcept { return pixels_; }
    [[nodiscard]] std::span<double> pixels() noexcept { return pixels_; }

    [[nodiscard]] std::span<const double> row(int y) const noexcept {
        return std::span<const double>(pixels_).subspan(static_cast<std::size_t>(y) * width_, width_);
    }

    [[nodiscard]] double mean() const noexcept;

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    [[nodiscard]] std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_;
    int height_;
    std::vector<double> pixels_;
};

/// Rounds every intensity to the nearest multiple of 1/255 after clamping to [0,1].
GrayImage quantize_8bit(const GrayImage& img);

}  // namespace afrl::image
