#include "afrl/scan/texture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "afrl/scan/walk.hpp"

namespace afrl::scan {

namespace {

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// Adds one octave of bilinearly interpolated lattice noise with the given cell size.
void add_value_noise(image::GrayImage& img, int cell, double amplitude, Rng& rng) {
    const int gw = img.width() / cell + 2;
    const int gh = img.height() / cell + 2;
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> lattice(static_cast<std::size_t>(gw) * gh);
    for (double& v : lattice) v = uni(rng);
    auto node = [&](int gx, int gy) { return lattice[static_cast<std::size_t>(gy) * gw + gx]; };
    for (int y = 0; y < img.height(); ++y) {
        const int gy = y / cell;
        const double ty = smoothstep(static_cast<double>(y % cell) / cell);
        for (int x = 0; x < img.width(); ++x) {
            const int gx = x / cell;
            const double tx = smoothstep(static_cast<double>(x % cell) / cell);
            const double top = node(gx, gy) * (1.0 - tx) + node(gx + 1, gy) * tx;
            const double bottom = node(gx, gy + 1) * (1.0 - tx) + node(gx + 1, gy + 1) * tx;
            img.at(x, y) += amplitude * (top * (1.0 - ty) + bottom * ty);
        }
    }
}

void paint_ellipse(image::GrayImage& img, double cx, double cy, double rx, double ry, double angle, double value) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double reach = std::max(rx, ry);
    const int x0 = std::max(0, static_cast<int>(cx - reach));
    const int x1 = std::min(img.width() - 1, static_cast<int>(cx + reach) + 1);
    const int y0 = std::max(0, static_cast<int>(cy - reach));
    const int y1 = std::min(img.height() - 1, static_cast<int>(cy + reach) + 1);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            const double u = (c * dx + s * dy) / rx;
            const double v = (-s * dx + c * dy) / ry;
            if (u * u + v * v <= 1.0) img.at(x, y) = 0.5 * img.at(x, y) + value;
        }
    }
}

void paint_stroke(image::GrayImage& img, double x0, double y0, double x1, double y1, double half_width,
                  double value) {
    const double len = std::hypot(x1 - x0, y1 - y0);
    if (len == 0.0) return;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double t = std::clamp(((x - x0) * (x1 - x0) + (y - y0) * (y1 - y0)) / (len * len), 0.0, 1.0);
            const double d = std::hypot(x - (x0 + t * (x1 - x0)), y - (y0 + t * (y1 - y0)));
            if (d <= half_width) img.at(x, y) = value;
        }
    }
}

}  // namespace

image::GrayImage synthesize_texture(int width, int height, std::uint64_t seed) {
    Rng rng(seed);
    image::GrayImage img(width, height, 0.0);
    for (int cell : {64, 32, 16, 8, 4}) {
        add_value_noise(img, cell, std::pow(cell / 64.0, 0.5), rng);
    }

    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int ellipses = 12 + static_cast<int>(uni(rng) * 20);
    for (int i = 0; i < ellipses; ++i) {
        paint_ellipse(img, uni(rng) * width, uni(rng) * height, 3.0 + uni(rng) * width / 8.0,
                      3.0 + uni(rng) * height / 8.0, uni(rng) * std::numbers::pi, (uni(rng) - 0.5) * 2.0);
    }
    const int strokes = 3 + static_cast<int>(uni(rng) * 6);
    for (int i = 0; i < strokes; ++i) {
        paint_stroke(img, uni(rng) * width, uni(rng) * height, uni(rng) * width, uni(rng) * height,
                     0.7 + uni(rng) * 2.0, (uni(rng) - 0.5) * 3.0);
    }

    const auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
    const double lo_v = *lo;
    const double span = std::max(*hi - lo_v, 1e-12);
    for (double& v : img.pixels()) v = 0.05 + 0.9 * (v - lo_v) / span;
    return image::quantize_8bit(img);
}

}  // namespace afrl::scan
