#include "afrl/image/filters.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "afrl/error.hpp"

namespace afrl::image {

namespace {

// Reflect-101 (gfedcb|abcdefgh|gfedcba): the border pixel is not repeated.
int reflect101(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

// Half-sample symmetric (cba|abcdefgh|hgf): the border pixel is repeated.
// Every source pixel contributes total weight 1 under a normalized symmetric
// kernel, so sums are preserved exactly for any image size.
int reflect_symmetric(int i, int n) {
    const int period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

std::vector<double> sampled_taps(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> taps(static_cast<std::size_t>(radius) + 1);
    double total = 0.0;
    for (int k = 0; k <= radius; ++k) {
        taps[k] = std::exp(-static_cast<double>(k) * k / (2.0 * sigma * sigma));
        total += k == 0 ? taps[k] : 2.0 * taps[k];
    }
    for (double& w : taps) w /= total;
    return taps;
}

void check_region(const GrayImage& img, const Rect& r) {
    if (r.width < 1 || r.height < 1 || r.x < 0 || r.y < 0 || r.x + r.width > img.width() ||
        r.y + r.height > img.height()) {
        throw PreconditionError("region [" + std::to_string(r.x) + "," + std::to_string(r.y) + " " +
                                std::to_string(r.width) + "x" + std::to_string(r.height) +
                                "] is not inside the " + std::to_string(img.width()) + "x" +
                                std::to_string(img.height()) + " image");
    }
}

Rect checked_patch_rect(const GrayImage& img, int cx, int cy, int size) {
    if (size < 1) {
        throw PreconditionError("patch size must be positive, got " + std::to_string(size));
    }
    const Rect r = centered_rect(cx, cy, size);
    std::string edges;
    auto note = [&edges](const char* edge) {
        if (!edges.empty()) edges += ", ";
        edges += edge;
    };
    if (r.x < 0) note("left");
    if (r.y < 0) note("top");
    if (r.x + size > img.width()) note("right");
    if (r.y + size > img.height()) note("bottom");
    if (!edges.empty()) {
        throw PreconditionError("patch of size " + std::to_string(size) + " centred at (" + std::to_string(cx) +
                                "," + std::to_string(cy) + ") overflows the " + edges + " edge of a " +
                                std::to_string(img.width()) + "x" + std::to_string(img.height()) + " image");
    }
    return r;
}

}  // namespace

GradientPair sobel_gradients(const GrayImage& img) {
    const int w = img.width();
    const int h = img.height();
    GrayImage gx(w, h);
    GrayImage gy(w, h);
    for (int y = 0; y < h; ++y) {
        const auto up = img.row(reflect101(y - 1, h));
        const auto mid = img.row(y);
        const auto down = img.row(reflect101(y + 1, h));
        for (int x = 0; x < w; ++x) {
            const int l = reflect101(x - 1, w);
            const int r = reflect101(x + 1, w);
            gx.at(x, y) = (up[r] - up[l]) + 2.0 * (mid[r] - mid[l]) + (down[r] - down[l]);
            gy.at(x, y) = (down[l] - up[l]) + 2.0 * (down[x] - up[x]) + (down[r] - up[r]);
        }
    }
    return {std::move(gx), std::move(gy)};
}

std::vector<double> gaussian_taps(double sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw DomainError("blur sigma must be finite and >= 0, got " + std::to_string(sigma));
    }
    if (sigma == 0.0) return {};
    if (sigma >= kSampledSigmaFloor) return sampled_taps(sigma);

    const double blend = (sigma / kSampledSigmaFloor) * (sigma / kSampledSigmaFloor);
    std::vector<double> taps = sampled_taps(kSampledSigmaFloor);
    for (std::size_t k = 1; k < taps.size(); ++k) taps[k] *= blend;
    taps[0] = 1.0 - blend * (1.0 - taps[0]);
    return taps;
}

GrayImage gaussian_blur_region(const GrayImage& img, double sigma, const Rect& region) {
    check_region(img, region);
    const std::vector<double> taps = gaussian_taps(sigma);
    if (taps.empty()) return crop(img, region);

    const int radius = static_cast<int>(taps.size()) - 1;
    const int w = img.width();
    const int h = img.height();

    // Source column for every horizontal offset the region touches.
    std::vector<int> cols(static_cast<std::size_t>(region.width + 2 * radius));
    for (int i = 0; i < static_cast<int>(cols.size()); ++i) {
        cols[i] = reflect_symmetric(region.x - radius + i, w);
    }
    std::vector<int> rows(static_cast<std::size_t>(region.height + 2 * radius));
    int row_lo = h;
    int row_hi = -1;
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
        rows[i] = reflect_symmetric(region.y - radius + i, h);
        row_lo = std::min(row_lo, rows[i]);
        row_hi = std::max(row_hi, rows[i]);
    }

    // Horizontal pass over every source row the vertical pass will read.
    const int hrows = row_hi - row_lo + 1;
    std::vector<double> horiz(static_cast<std::size_t>(hrows) * region.width);
    for (int j = 0; j < hrows; ++j) {
        const auto src = img.row(row_lo + j);
        double* dst = horiz.data() + static_cast<std::size_t>(j) * region.width;
        for (int x = 0; x < region.width; ++x) {
            const int c = x + radius;
            const double center = src[cols[c]];
            double acc = 0.0;
            for (int k = 1; k <= radius; ++k) {
                acc += taps[k] * ((src[cols[c + k]] - center) + (src[cols[c - k]] - center));
            }
            dst[x] = center + acc;
        }
    }

    GrayImage out(region.width, region.height);
    auto at_h = [&](int source_row, int x) {
        return horiz[static_cast<std::size_t>(source_row - row_lo) * region.width + x];
    };
    for (int y = 0; y < region.height; ++y) {
        const int c = y + radius;
        for (int x = 0; x < region.width; ++x) {
            const double center = at_h(rows[c], x);
            double acc = 0.0;
            for (int k = 1; k <= radius; ++k) {
                acc += taps[k] * ((at_h(rows[c + k], x) - center) + (at_h(rows[c - k], x) - center));
            }
            out.at(x, y) = center + acc;
        }
    }
    return out;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    return gaussian_blur_region(img, sigma, Rect{0, 0, img.width(), img.height()});
}

Rect centered_rect(int cx, int cy, int size) { return Rect{cx - size / 2, cy - size / 2, size, size}; }

GrayImage crop(const GrayImage& img, const Rect& rect) {
    check_region(img, rect);
    std::vector<double> pixels;
    pixels.reserve(static_cast<std::size_t>(rect.width) * rect.height);
    for (int y = rect.y; y < rect.y + rect.height; ++y) {
        const auto src = img.row(y).subspan(static_cast<std::size_t>(rect.x), rect.width);
        pixels.insert(pixels.end(), src.begin(), src.end());
    }
    return GrayImage(rect.width, rect.height, std::move(pixels));
}

GrayImage extract_patch(const GrayImage& img, int cx, int cy, int size) {
    return crop(img, checked_patch_rect(img, cx, cy, size));
}

GrayImage extract_center_patch(const GrayImage& img, int size) {
    return extract_patch(img, img.width() / 2, img.height() / 2, size);
}

void DefocusModel::validate() const {
    if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) {
        throw DomainError("defocus sigma0 must be positive, got " + std::to_string(sigma0));
    }
    if (!(f_star >= 0.0 && f_star <= 1.0)) {
        throw DomainError("optimal focal power must lie in [0,1], got " + std::to_string(f_star));
    }
}

double DefocusModel::blur_sigma(double f) const {
    if (!(f >= 0.0 && f <= 1.0)) {
        throw DomainError("focal power must lie in [0,1], got " + std::to_string(f));
    }
    return sigma0 * std::abs(f_star - f);
}

GrayImage defocus_render(const GrayImage& sharp, double f, const DefocusModel& model) {
    model.validate();
    return gaussian_blur(sharp, model.blur_sigma(f));
}

GrayImage defocus_patch(const GrayImage& sharp, double f, const DefocusModel& model, int cx, int cy, int size) {
    model.validate();
    const Rect r = checked_patch_rect(sharp, cx, cy, size);
    return gaussian_blur_region(sharp, model.blur_sigma(f), r);
}

}  // namespace afrl::image
