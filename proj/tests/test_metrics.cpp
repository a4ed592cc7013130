#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "afrl/error.hpp"
#include "afrl/image/filters.hpp"
#include "afrl/metrics/focus_metrics.hpp"
#include "support.hpp"

using namespace afrl;
using image::GrayImage;

namespace {

GrayImage checkerboard(int n) {
    GrayImage img(n, n);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) img.at(x, y) = (x + y) % 2;
    }
    return img;
}

double dense_mlr(const GrayImage& img, double sigma) {
    const auto g = test::dense_gaussian(img, sigma);
    double sum = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double a = g[i] + 1.0, b = img.pixels()[i] + 1.0;
        sum += std::max(a / b, b / a);
    }
    return sum / static_cast<double>(g.size());
}

GrayImage scaled(const GrayImage& img, double a) {
    std::vector<double> px(img.pixels().begin(), img.pixels().end());
    for (auto& v : px) v *= a;
    return GrayImage(img.width(), img.height(), px);
}

}  // namespace

TEST_CASE("mgm of constants and the 3x3 ramp") {
    CHECK(metrics::mgm(GrayImage(9, 4, 0.7)) == 0.0);
    // Only the centre column responds (|Ix| = 4); border columns mirror to zero.
    CHECK(metrics::mgm(test::ramp_columns({0.0, 0.5, 1.0}, 3)) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("mgm matches the dense sobel oracle") {
    const auto img = test::random_image(17, 12, 8);
    const auto [gx, gy] = test::dense_sobel(img);
    double sum = 0;
    for (std::size_t i = 0; i < gx.size(); ++i) sum += std::hypot(gx[i], gy[i]);
    CHECK(metrics::mgm(img) == doctest::Approx(sum / static_cast<double>(gx.size())).epsilon(1e-12));
}

TEST_CASE("mgm is positively homogeneous") {
    const auto img = test::texture(3, 64);
    const double base = metrics::mgm(img);
    CHECK(metrics::mgm(scaled(img, 0.0)) == 0.0);
    for (double a : {0.5, 2.0}) CHECK(std::abs(metrics::mgm(scaled(img, a)) - a * base) / (a * base) < 1e-9);
}

TEST_CASE("mlr of a checkerboard matches a brute-force oracle") {
    const auto board = checkerboard(8);
    const double v = metrics::mlr(board, 4.0);
    CHECK(v == doctest::Approx(dense_mlr(board, 4.0)).epsilon(1e-12));
    CHECK(v == doctest::Approx(1.4166237687664527).epsilon(1e-12));
}

TEST_CASE("mlr bounds") {
    CHECK(metrics::mlr(GrayImage(10, 10, 0.3), 4.0) == 1.0);
    for (std::uint64_t seed = 0; seed < 200; ++seed) CHECK(metrics::mlr(test::random_image(16, 16, seed), 4.0) >= 1.0);
    CHECK_THROWS_AS(metrics::mlr(GrayImage(4, 4), 0.0), DomainError);
}

TEST_CASE("metric dispatch") {
    const auto ramp = test::ramp_columns({0.0, 0.2, 0.4, 0.6}, 5);
    CHECK(metrics::evaluate_metric(metrics::MetricKind::mgm(), GrayImage(5, 5, 0.1)) == 0.0);
    CHECK(metrics::evaluate_metric(metrics::MetricKind::mlr(), GrayImage(5, 5, 0.1)) == 1.0);
    CHECK(metrics::evaluate_metric(metrics::MetricKind::mgm(), ramp) == metrics::mgm(ramp));
    CHECK(metrics::evaluate_metric(metrics::MetricKind::mlr(2.0), ramp) == metrics::mlr(ramp, 2.0));
    CHECK(metrics::parse_metric_kind("mlr").kind == metrics::MetricKind::Kind::Mlr);
    CHECK_THROWS_AS(metrics::parse_metric_kind("MGM"), ConfigError);
    CHECK_THROWS_AS(metrics::MetricKind::mlr(-1.0).validate(), ConfigError);
}

TEST_CASE("metrics are sensitive to pixel arrangement") {
    const auto img = test::texture(11, 32);
    std::vector<double> px(img.pixels().begin(), img.pixels().end());
    std::mt19937_64 rng(1);
    std::shuffle(px.begin(), px.end(), rng);
    const GrayImage shuffled(32, 32, px);
    CHECK(metrics::mgm(shuffled) != metrics::mgm(img));
    CHECK(metrics::mlr(shuffled, 4.0) != metrics::mlr(img, 4.0));
}

TEST_CASE("both metrics peak at focus on the 0.01 grid") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const auto sharp = image::extract_center_patch(test::texture(100 + seed, 96));
        for (const auto& kind : {metrics::MetricKind::mgm(), metrics::MetricKind::mlr()}) {
            const double f_star = 0.13 + 0.09 * static_cast<double>(seed);
            const image::DefocusModel model{2.0 + 0.75 * static_cast<double>(seed), f_star};
            int best = 0;
            double best_v = -1;
            for (int k = 0; k <= 100; ++k) {
                const double v = metrics::evaluate_metric(kind, image::defocus_render(sharp, k / 100.0, model));
                if (v > best_v) best_v = v, best = k;
            }
            CHECK(std::abs(best / 100.0 - f_star) <= 0.01 + 1e-12);
        }
    }
}
