#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>

#include "afrl/error.hpp"
#include "afrl/image/filters.hpp"
#include "afrl/image/pgm.hpp"
#include "afrl/metrics/focus_metrics.hpp"
#include "support.hpp"

using namespace afrl;
using image::GrayImage;

TEST_CASE("gray image validates its shape and values") {
    CHECK_THROWS_AS(GrayImage(0, 3), ShapeError);
    CHECK_THROWS_AS(GrayImage(2, 2, std::vector<double>(3, 0.0)), ShapeError);
    CHECK_THROWS_AS(GrayImage(1, 1, std::vector<double>{std::nan("")}), PreconditionError);
    GrayImage img(3, 2, 0.25);
    CHECK(img.size() == 6);
    CHECK(img.mean() == doctest::Approx(0.25));
}

TEST_CASE("quantize_8bit snaps to the 1/255 lattice") {
    GrayImage img(3, 1, std::vector<double>{-0.2, 0.5, 1.7});
    const auto q = image::quantize_8bit(img);
    CHECK(q.at(0, 0) == 0.0);
    CHECK(q.at(1, 0) == 128.0 / 255.0);
    CHECK(q.at(2, 0) == 1.0);
}

TEST_CASE("sobel of a constant image is zero") {
    const auto g = image::sobel_gradients(GrayImage(7, 5, 0.42));
    for (double v : g.gx.pixels()) CHECK(v == 0.0);
    for (double v : g.gy.pixels()) CHECK(v == 0.0);
}

TEST_CASE("sobel centre of a 3x3 column ramp") {
    const auto g = image::sobel_gradients(test::ramp_columns({0.0, 0.5, 1.0}, 3));
    CHECK(g.gx.at(1, 1) == doctest::Approx(4.0));
    CHECK(g.gy.at(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("sobel matches a dense reflect-101 oracle and is linear") {
    const auto img = test::random_image(11, 9, 3);
    const auto g = image::sobel_gradients(img);
    const auto [ox, oy] = test::dense_sobel(img);
    for (std::size_t i = 0; i < img.size(); ++i) {
        CHECK(g.gx.pixels()[i] == doctest::Approx(ox[i]).epsilon(1e-12));
        CHECK(g.gy.pixels()[i] == doctest::Approx(oy[i]).epsilon(1e-12));
    }
    std::vector<double> scaled(img.pixels().begin(), img.pixels().end());
    for (auto& v : scaled) v *= 2.5;
    const auto gs = image::sobel_gradients(GrayImage(11, 9, scaled));
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(gs.gx.pixels()[i] == doctest::Approx(2.5 * ox[i]));
}

TEST_CASE("gaussian taps") {
    CHECK(image::gaussian_taps(0.0).empty());
    const auto taps = image::gaussian_taps(2.0);
    CHECK(taps.size() == 7);  // radius ceil(6)
    double sum = taps[0];
    for (std::size_t k = 1; k < taps.size(); ++k) sum += 2 * taps[k];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
    const auto tiny = image::gaussian_taps(0.1);
    CHECK(tiny[0] < 1.0);
    CHECK(tiny[0] > 0.9);
}

TEST_CASE("gaussian blur identities") {
    const auto img = test::random_image(20, 17, 9);
    CHECK(image::gaussian_blur(img, 0.0) == img);
    const GrayImage flat(13, 21, 0.37);
    for (double s : {0.2, 1.0, 3.3}) {
        for (double v : image::gaussian_blur(flat, s).pixels()) CHECK(v == doctest::Approx(0.37).epsilon(1e-14));
    }
    CHECK_THROWS_AS(image::gaussian_blur(img, -1.0), DomainError);
    CHECK_THROWS_AS(image::gaussian_blur(img, std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("impulse response equals the normalized kernel weight at 0") {
    std::vector<double> row(9, 0.0);
    row[4] = 1.0;
    const auto out = image::gaussian_blur(GrayImage(9, 1, row), 1.0);
    // 1 / sum_{k=-3..3} exp(-k^2/2)
    CHECK(out.at(4, 0) == doctest::Approx(0.3990502796524549).epsilon(1e-14));
}

TEST_CASE("gaussian blur matches a dense 2-D oracle") {
    const auto img = test::random_image(23, 19, 4);
    for (double s : {0.5, 1.3, 4.0}) {
        const auto out = image::gaussian_blur(img, s);
        const auto ref = test::dense_gaussian(img, s);
        for (std::size_t i = 0; i < ref.size(); ++i) CHECK(out.pixels()[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    }
}

TEST_CASE("gaussian blur preserves the mean") {
    for (double s : {0.3, 1.0, 2.0, 4.0}) {
        const auto img = test::random_image(64, 64, 17);
        const double before = img.mean();
        const double after = image::gaussian_blur(img, s).mean();
        CHECK(std::abs(after - before) / before < 1e-6);
    }
}

TEST_CASE("blur semigroup holds approximately on interior pixels") {
    const auto img = test::texture(21, 128);
    const double s1 = 1.5, s2 = 2.0;
    const auto twice = image::gaussian_blur(image::gaussian_blur(img, s1), s2);
    const auto once = image::gaussian_blur(img, std::hypot(s1, s2));
    double worst = 0;
    for (int y = 24; y < 104; ++y) {
        for (int x = 24; x < 104; ++x) worst = std::max(worst, std::abs(twice.at(x, y) - once.at(x, y)));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("region blur is bitwise equal to the full blur") {
    const auto img = test::texture(5, 96);
    for (double s : {0.0, 0.4, 2.5, 7.0}) {
        const image::Rect r{30, 20, 32, 32};
        const auto full = image::crop(image::gaussian_blur(img, s), r);
        CHECK(image::gaussian_blur_region(img, s, r) == full);
    }
}

TEST_CASE("extract_patch") {
    const auto img = test::random_image(64, 64, 1);
    const auto p = image::extract_patch(img, 32, 32, 32);
    CHECK(p.width() == 32);
    CHECK(p.at(0, 0) == img.at(16, 16));
    CHECK(p.at(31, 31) == img.at(47, 47));
    const auto whole = test::random_image(32, 32, 2);
    CHECK(image::extract_center_patch(whole) == whole);
    try {
        (void)image::extract_patch(test::random_image(40, 40, 3), 5, 5, 32);
        FAIL("expected a precondition error");
    } catch (const PreconditionError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("left") != std::string::npos);
        CHECK(msg.find("top") != std::string::npos);
    }
}

TEST_CASE("defocus model") {
    const image::DefocusModel m{4.0, 0.8};
    CHECK(m.blur_sigma(0.3) == doctest::Approx(2.0));
    CHECK_THROWS_AS((void)m.blur_sigma(1.2), DomainError);
    CHECK_THROWS_AS((image::DefocusModel{0.0, 0.5}.validate()), DomainError);
    const auto sharp = test::texture(8, 96);
    CHECK(image::defocus_render(sharp, 0.8, m) == sharp);
    CHECK(image::defocus_render(sharp, 0.3, m) == image::gaussian_blur(sharp, 2.0));
    CHECK(image::defocus_patch(sharp, 0.55, m, 48, 48) ==
          image::extract_patch(image::defocus_render(sharp, 0.55, m), 48, 48));
}

TEST_CASE("defocus lowers MGM and responds monotonically") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto sharp = test::texture(seed, 96);
        const double base = metrics::mgm(sharp);
        double prev = base;
        for (double s : {0.5, 1.0, 2.0, 3.0, 5.0, 8.0}) {
            const double v = metrics::mgm(image::gaussian_blur(sharp, s));
            CHECK(v < base);
            CHECK(v <= prev);
            prev = v;
        }
    }
}

TEST_CASE("defocus render is continuous in f") {
    const auto sharp = test::texture(2, 96);
    const image::DefocusModel m{8.0, 0.5};
    for (double f : {0.0, 0.25, 0.4999, 0.5, 0.51, 0.9}) {
        const auto a = image::defocus_render(sharp, f, m);
        const auto b = image::defocus_render(sharp, std::min(1.0, f + 1e-3), m);
        double worst = 0;
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.pixels()[i] - b.pixels()[i]));
        CHECK(worst < 0.02);
    }
}

TEST_CASE("pgm round trip and error handling") {
    const auto dir = test::temp_dir("pgm");
    const auto img = image::quantize_8bit(test::random_image(13, 7, 5));
    image::write_pgm(img, dir / "a.pgm");
    CHECK(image::read_pgm(dir / "a.pgm") == img);
    {
        std::ofstream out(dir / "bad.pgm", std::ios::binary);
        out << "P5\n13 7\n255\n" << std::string(20, 'x');
    }
    CHECK_THROWS_AS(image::read_pgm(dir / "bad.pgm"), TruncatedFileError);
    CHECK_THROWS_AS(image::read_pgm(dir / "missing.pgm"), FormatError);
}
