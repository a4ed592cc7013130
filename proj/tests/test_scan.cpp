#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "afrl/error.hpp"
#include "afrl/image/filters.hpp"
#include "afrl/image/pgm.hpp"
#include "afrl/scan/scan.hpp"
#include "afrl/scan/scan_io.hpp"
#include "afrl/scan/walk.hpp"
#include "support.hpp"

using namespace afrl;
using image::GrayImage;

namespace {

scan::FocalStackScan grid_stack(const GrayImage& sharp, std::vector<double> grid, double f_star, double sigma0) {
    scan::FocalStackScan s;
    s.focal_grid = grid;
    std::vector<GrayImage> pose;
    for (double f : grid) pose.push_back(image::defocus_render(sharp, f, {sigma0, f_star}));
    s.images.push_back(pose);
    return s;
}

}  // namespace

TEST_CASE("walk step fixed point and ballistic motion") {
    scan::Rng rng(1);
    std::vector<double> x{0.4}, v{0.0};
    const std::vector<double> lo{0.0}, hi{1.0};
    for (int i = 0; i < 50; ++i) scan::walk_step(x, v, {0.9, 0.0}, lo, hi, rng);
    CHECK(x[0] == 0.4);

    x = {0.1};
    v = {0.02};
    for (int i = 1; i <= 10; ++i) {
        scan::walk_step(x, v, {1.0, 0.0}, lo, hi, rng);
        CHECK(x[0] == doctest::Approx(0.1 + 0.02 * i).epsilon(1e-12));
        CHECK(v[0] == 0.02);
    }
}

TEST_CASE("walk step reflects off the bounds") {
    scan::Rng rng(2);
    std::vector<double> x{0.97}, v{0.05};
    scan::walk_step(x, v, {1.0, 0.0}, std::vector<double>{0.0}, std::vector<double>{1.0}, rng);
    CHECK(x[0] == doctest::Approx(0.98).epsilon(1e-12));  // 1.02 -> 1 - 0.02
    CHECK(v[0] == -0.05);
    x = {0.01};
    v = {-0.04};
    scan::walk_step(x, v, {1.0, 0.0}, std::vector<double>{0.0}, std::vector<double>{1.0}, rng);
    CHECK(x[0] == doctest::Approx(0.03).epsilon(1e-12));
    CHECK(v[0] == 0.04);
}

TEST_CASE("walk speed cap bounds each step") {
    scan::Rng rng(3);
    std::vector<double> x{0.5}, v{0.0};
    for (int i = 0; i < 2000; ++i) {
        const double before = x[0];
        scan::walk_step(x, v, {0.9, 0.3, 0.05}, std::vector<double>{0.0}, std::vector<double>{1.0}, rng);
        CHECK(std::abs(x[0] - before) <= 0.05 + 1e-12);
        CHECK(x[0] >= 0.0);
        CHECK(x[0] <= 1.0);
    }
}

TEST_CASE("walk config validation") {
    scan::WalkConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.focus_velocity_decay = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.crop_noise_std = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("simulated scans are deterministic and well formed") {
    const std::vector<GrayImage> src{test::texture(4, 200)};
    scan::SimulationConfig cfg;
    cfg.frames = 40;
    cfg.walk.seed = 99;
    const auto a = scan::build_simulated_scan(src, cfg, "t4");
    const auto b = scan::build_simulated_scan(src, cfg, "t4");
    CHECK(a == b);
    CHECK(a.frame_count() == 40);
    CHECK(a.frames.front().width() == 128);
    CHECK(a.sigma0 >= 2.0);
    CHECK(a.sigma0 <= 8.0);
    CHECK_NOTHROW(a.validate());
    cfg.walk.seed = 100;
    CHECK_FALSE(scan::build_simulated_scan(src, cfg, "t4") == a);

    cfg.frames = 1;
    const auto one = scan::build_simulated_scan(src, cfg, "t4");
    CHECK(one.frame_count() == 1);

    cfg.crop_size = 256;
    CHECK_THROWS_AS(scan::build_simulated_scan(src, cfg, "t4"), ConfigError);
}

TEST_CASE("video sources crop frame t modulo the clip length") {
    const std::vector<GrayImage> clip{GrayImage(140, 140, 0.2), GrayImage(140, 140, 0.6)};
    scan::SimulationConfig cfg;
    cfg.frames = 5;
    const auto s = scan::build_simulated_scan(clip, cfg, "clip");
    for (int t = 0; t < 5; ++t) {
        const double expect = image::quantize_8bit(GrayImage(1, 1, t % 2 == 0 ? 0.2 : 0.6)).at(0, 0);
        CHECK(s.frames[static_cast<std::size_t>(t)].at(3, 3) == expect);
    }
}

TEST_CASE("default focus walk calibration over 100 seeds") {
    const std::vector<GrayImage> src{GrayImage(128, 128, 0.5)};
    scan::SimulationConfig cfg;
    double range_sum = 0;
    double worst_step = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        cfg.walk.seed = seed;
        const auto s = scan::build_simulated_scan(src, cfg, "flat");
        const auto [lo, hi] = std::minmax_element(s.f_star.begin(), s.f_star.end());
        range_sum += *hi - *lo;
        for (std::size_t t = 1; t < s.f_star.size(); ++t) {
            worst_step = std::max(worst_step, std::abs(s.f_star[t] - s.f_star[t - 1]));
        }
        CHECK(*lo >= 0.0);
        CHECK(*hi <= 1.0);
    }
    CHECK(worst_step <= 0.05 + 1e-12);
    CHECK(range_sum / 100.0 >= 0.3);
}

TEST_CASE("env step on simulated scans") {
    const auto frame = image::quantize_8bit(test::texture(6, 96));
    const scan::Scan s = test::constant_scan(frame, {0.3, 0.7}, 5.0);
    CHECK(scan::env_step(s, 0, 0.3) == frame);
    CHECK(scan::env_step(s, 1, 0.5) == image::defocus_render(frame, 0.5, {5.0, 0.7}));
    CHECK(scan::env_patch(s, 1, 0.45) == image::extract_center_patch(scan::env_step(s, 1, 0.45)));
    CHECK_THROWS_AS(scan::env_step(s, 2, 0.5), IndexError);
    CHECK_THROWS_AS(scan::env_step(s, -1, 0.5), IndexError);
    CHECK_THROWS_AS(scan::env_step(s, 0, 1.5), DomainError);
    CHECK(*scan::optimal_focus(s, 1) == 0.7);
}

TEST_CASE("env step on focal stacks uses the nearest grid entry") {
    scan::FocalStackScan stack;
    stack.focal_grid = {0.2, 0.5, 0.8};
    stack.images = {{GrayImage(4, 4, 0.1), GrayImage(4, 4, 0.2), GrayImage(4, 4, 0.3)}};
    const scan::Scan s = stack;
    CHECK(scan::env_step(s, 0, 0.34).at(0, 0) == 0.1);
    CHECK(scan::env_step(s, 0, 0.35).at(0, 0) == 0.1);  // equidistant -> lower index
    CHECK(scan::env_step(s, 0, 0.36).at(0, 0) == 0.2);
    CHECK(scan::env_step(s, 0, 1.0).at(0, 0) == 0.3);
    CHECK_FALSE(scan::optimal_focus(s, 0).has_value());
    CHECK(scan::nearest_grid_index(stack.focal_grid, 0.65) == 1);
}

TEST_CASE("oracle optimal focus") {
    const auto sharp = image::extract_center_patch(test::texture(12, 96));
    std::vector<double> grid;
    for (int k = 0; k <= 10; ++k) grid.push_back(k / 10.0);
    const auto stack = grid_stack(sharp, grid, 0.6, 4.0);
    CHECK(scan::oracle_optimal_focus(stack.images[0], grid) == 0.6);

    const std::vector<GrayImage> single{sharp};
    CHECK(scan::oracle_optimal_focus(single, std::vector<double>{0.42}) == 0.42);
    const std::vector<GrayImage> twins{sharp, sharp};
    CHECK(scan::oracle_optimal_focus(twins, std::vector<double>{0.3, 0.7}) == 0.3);
    CHECK_THROWS_AS(scan::oracle_optimal_focus({}, {}), DomainError);
    CHECK_THROWS_AS(scan::oracle_optimal_focus(twins, std::vector<double>{0.3}), ShapeError);
}

TEST_CASE("scan round trips through disk") {
    const auto dir = test::temp_dir("scan_io");
    const std::vector<GrayImage> src{test::texture(7, 180)};
    scan::SimulationConfig cfg;
    cfg.frames = 12;
    cfg.walk.seed = 5;
    const auto sim = scan::build_simulated_scan(src, cfg, "tex7");
    scan::save_scan(sim, dir / "sim");
    const auto loaded = scan::load_scan(dir / "sim");
    REQUIRE(std::holds_alternative<scan::SimulatedScan>(loaded));
    CHECK(std::get<scan::SimulatedScan>(loaded) == sim);

    auto stack = grid_stack(image::quantize_8bit(image::extract_center_patch(test::texture(1, 64))),
                            {0.1, 0.35, 0.9}, 0.35, 3.0);
    for (auto& img : stack.images[0]) img = image::quantize_8bit(img);
    stack.images.push_back(stack.images[0]);
    stack.f_star = std::vector<double>{0.35, 0.1};
    scan::save_scan(stack, dir / "stack");
    const auto back = std::get<scan::FocalStackScan>(scan::load_scan(dir / "stack"));
    CHECK(back == stack);
    CHECK(back.focal_grid == std::vector<double>{0.1, 0.35, 0.9});
}

TEST_CASE("scan loading reports distinct failures") {
    const auto dir = test::temp_dir("scan_errors");
    const std::vector<GrayImage> src{test::texture(9, 180)};
    scan::SimulationConfig cfg;
    cfg.frames = 6;
    const auto sim = scan::build_simulated_scan(src, cfg, "tex9");

    CHECK_THROWS_AS(scan::load_scan(dir / "nothing"), MissingManifestError);

    scan::save_scan(sim, dir / "missing");
    std::filesystem::remove(dir / "missing" / "frame_00004.pgm");
    try {
        (void)scan::load_scan(dir / "missing");
        FAIL("expected a frame count error");
    } catch (const FrameCountError& e) {
        CHECK(std::string(e.what()).find('4') != std::string::npos);
    }

    scan::save_scan(sim, dir / "corrupt");
    auto other = sim.frames[2];
    other.at(0, 0) = other.at(0, 0) > 0.5 ? 0.0 : 1.0;
    image::write_pgm(other, dir / "corrupt" / "frame_00002.pgm");
    CHECK_THROWS_AS(scan::load_scan(dir / "corrupt"), ChecksumError);

    scan::save_scan(sim, dir / "version");
    nlohmann::json manifest;
    {
        std::ifstream in(dir / "version" / "manifest.json");
        manifest = nlohmann::json::parse(in);
    }
    manifest["format_version"] = 99;
    std::ofstream(dir / "version" / "manifest.json") << manifest.dump();
    CHECK_THROWS_AS(scan::load_scan(dir / "version"), FormatVersionError);

    std::ofstream(dir / "version" / "manifest.json") << "{ not json";
    CHECK_THROWS_AS(scan::load_scan(dir / "version"), CorruptHeaderError);

    const auto listed = scan::list_scan_dirs(dir);
    CHECK(listed.size() == 3);
    CHECK(std::is_sorted(listed.begin(), listed.end()));
}

TEST_CASE("synthetic textures are deterministic and textured") {
    const auto a = scan::synthesize_texture(64, 48, 3);
    CHECK(a == scan::synthesize_texture(64, 48, 3));
    CHECK_FALSE(a == scan::synthesize_texture(64, 48, 4));
    const auto [lo, hi] = std::minmax_element(a.pixels().begin(), a.pixels().end());
    CHECK(*lo >= 0.0);
    CHECK(*hi <= 1.0);
    CHECK(*hi - *lo > 0.5);
}
