// Shared fixtures and independent reference implementations for the unit tests.
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "afrl/bench/evaluate.hpp"
#include "afrl/image/gray_image.hpp"
#include "afrl/scan/scan.hpp"
#include "afrl/scan/texture.hpp"

namespace afrl::test {

inline image::GrayImage random_image(int w, int h, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> px(static_cast<std::size_t>(w) * h);
    for (auto& p : px) p = u(rng);
    return image::GrayImage(w, h, std::move(px));
}

inline image::GrayImage ramp_columns(std::vector<double> cols, int h) {
    const int w = static_cast<int>(cols.size());
    image::GrayImage img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) img.at(x, y) = cols[static_cast<std::size_t>(x)];
    }
    return img;
}

inline int reflect101(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * n - 2 - i;
    return i;
}

/// Half-sample symmetric reflection: -1 -> 0, n -> n-1.
inline int reflect_symmetric(int i, int n) {
    const int period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

/// Dense 3x3 Sobel (correlation) with reflect-101 indexing.
inline std::pair<std::vector<double>, std::vector<double>> dense_sobel(const image::GrayImage& img) {
    static const int kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
    const int w = img.width(), h = img.height();
    std::vector<double> gx(img.size()), gy(img.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double sx = 0, sy = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const double v = img.at(reflect101(x + dx, w), reflect101(y + dy, h));
                    sx += kx[dy + 1][dx + 1] * v;
                    sy += kx[dx + 1][dy + 1] * v;
                }
            }
            gx[static_cast<std::size_t>(y) * w + x] = sx;
            gy[static_cast<std::size_t>(y) * w + x] = sy;
        }
    }
    return {gx, gy};
}

/// Dense 2-D Gaussian (radius ceil(3 sigma), normalized, symmetric border) for sigma >= 0.5.
inline std::vector<double> dense_gaussian(const image::GrayImage& img, double sigma) {
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> w(static_cast<std::size_t>(2 * r + 1));
    double z = 0;
    for (int k = -r; k <= r; ++k) z += w[static_cast<std::size_t>(k + r)] = std::exp(-k * k / (2 * sigma * sigma));
    for (auto& v : w) v /= z;
    const int W = img.width(), H = img.height();
    std::vector<double> out(img.size());
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            double acc = 0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    acc += w[static_cast<std::size_t>(dy + r)] * w[static_cast<std::size_t>(dx + r)] *
                           img.at(reflect_symmetric(x + dx, W), reflect_symmetric(y + dy, H));
                }
            }
            out[static_cast<std::size_t>(y) * W + x] = acc;
        }
    }
    return out;
}

inline image::GrayImage texture(std::uint64_t seed, int size = 160) { return scan::synthesize_texture(size, size, seed); }

/// Simulated scan with a hand-set f* trajectory over copies of one frame.
inline scan::SimulatedScan constant_scan(const image::GrayImage& frame, std::vector<double> f_star, double sigma0 = 4.0) {
    scan::SimulatedScan s;
    s.frames.assign(f_star.size(), frame);
    s.f_star = std::move(f_star);
    s.sigma0 = sigma0;
    s.source_id = "fixture";
    return s;
}

inline std::vector<bench::LabeledScan> simulated_set(int count, std::uint64_t seed, int frames = 60, int sources = 4) {
    std::vector<bench::LabeledScan> out;
    for (int i = 0; i < count; ++i) {
        const std::vector<image::GrayImage> src{texture(500 + static_cast<std::uint64_t>(i % sources), 192)};
        scan::SimulationConfig cfg;
        cfg.frames = frames;
        cfg.walk.seed = seed * 1000 + static_cast<std::uint64_t>(i);
        char id[32];
        std::snprintf(id, sizeof id, "scan_%03d", i);
        out.push_back({id, scan::build_simulated_scan(src, cfg, "tex" + std::to_string(i % sources))});
    }
    return out;
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("afrl_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace afrl::test
