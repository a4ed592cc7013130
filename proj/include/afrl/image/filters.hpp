#pragma once

#include <vector>

#include "afrl/image/gray_image.hpp"

namespace afrl::image {

/// Half-open pixel rectangle [x, x + width) x [y, y + height).
struct Rect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    friend bool operator==(const Rect&, const Rect&) = default;
};

struct GradientPair {
    GrayImage gx;
    GrayImage gy;
};

/// Full-resolution 3x3 Sobel responses (correlation form, so a left-to-right
/// intensity ramp yields a positive x response). Reflect-101 border.
GradientPair sobel_gradients(const GrayImage& img);

/// One-sided taps w[0..radius] of the normalized symmetric blur kernel used by
/// gaussian_blur. Empty for sigma == 0.
///
/// For sigma >= kSampledSigmaFloor the taps are exp(-k^2 / 2 sigma^2) truncated
/// at ceil(3 sigma) and renormalized. Below the floor the sampled kernel loses
/// almost all of its off-center mass, so the kernel is blended toward the
/// identity instead: (1 - l) * delta + l * K(floor) with l = (sigma / floor)^2.
/// This keeps the kernel variance proportional to sigma^2 all the way to zero.
std::vector<double> gaussian_taps(double sigma);

inline constexpr double kSampledSigmaFloor = 0.5;

/// Separable Gaussian blur with a half-sample symmetric border; sigma == 0
/// returns the input unchanged. Throws DomainError for negative or non-finite sigma.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

/// Blurs only the pixels inside `region`, reading neighbours from the whole
/// image. Pixel values are bitwise identical to the same pixels of
/// gaussian_blur(img, sigma).
GrayImage gaussian_blur_region(const GrayImage& img, double sigma, const Rect& region);

/// Rectangle of side `size` centred on (cx, cy): origin (cx - size/2, cy - size/2).
Rect centered_rect(int cx, int cy, int size);

/// Copies the size x size crop centred on (cx, cy). Throws PreconditionError
/// naming the overflowing edge(s) if the crop leaves the image.
GrayImage extract_patch(const GrayImage& img, int cx, int cy, int size = 32);

/// Crop centred on the image centre (width/2, height/2).
GrayImage extract_center_patch(const GrayImage& img, int size = 32);

GrayImage crop(const GrayImage& img, const Rect& rect);

/// Gaussian approximation of optical defocus: sigma = sigma0 * |f_star - f|.
struct DefocusModel {
    double sigma0 = 4.0;
    double f_star = 0.5;

    /// Throws DomainError when sigma0 <= 0 or f_star is outside [0,1].
    void validate() const;
    [[nodiscard]] double blur_sigma(double f) const;
};

/// Renders `sharp` as seen at focal power f. Throws DomainError for f outside [0,1].
GrayImage defocus_render(const GrayImage& sharp, double f, const DefocusModel& model);

/// Same pixels as extract_patch(defocus_render(sharp, f, model), cx, cy, size),
/// computed from the patch neighbourhood only.
GrayImage defocus_patch(const GrayImage& sharp, double f, const DefocusModel& model, int cx, int cy,
                        int size = 32);

}  // namespace afrl::image
