#include <doctest.h>

#include <fstream>
#include <sstream>

#include "afrl/bench/export.hpp"
#include "afrl/cli/commands.hpp"
#include "afrl/cli/run_config.hpp"
#include "afrl/error.hpp"
#include "afrl/image/filters.hpp"
#include "afrl/image/pgm.hpp"
#include "afrl/scan/scan_io.hpp"
#include "support.hpp"

using namespace afrl;
using namespace afrl::cli;

namespace {

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("run config keys, overrides and validation") {
    RunConfig cfg;
    cfg.apply_assignment("batch_size=32");
    cfg.apply_assignment("policy=rl-cnn");
    cfg.apply_assignment("learning_rate=3e-4");
    CHECK(cfg.train.batch_size == 32);
    CHECK(cfg.policy == "rl-cnn");
    CHECK(cfg.train.learning_rate == 3e-4);
    CHECK(cfg.train_config().warmup == 320);
    cfg.apply_assignment("warmup=50");
    CHECK(cfg.train_config().warmup == 50);

    CHECK_THROWS_AS(cfg.apply_assignment("batchsize=32"), ConfigError);
    CHECK_THROWS_AS(cfg.apply_assignment("batch_size=\"many\""), ConfigError);
    CHECK_THROWS_AS(cfg.apply_assignment("no_equals_sign"), ConfigError);
    cfg.apply_assignment("frames=0");
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    RunConfig round;
    round.apply(cfg.to_json());
    CHECK(round.to_json() == cfg.to_json());
    for (const auto& k : RunConfig::keys()) CHECK(cfg.to_json().contains(k));
}

TEST_CASE("config files layer under later overrides") {
    const auto dir = test::temp_dir("cfg");
    std::ofstream(dir / "run.json") << R"({"seed": 4, "gamma": 0.9, "frames": 30})";
    RunConfig cfg;
    cfg.apply_file(dir / "run.json");
    cfg.apply_assignment("frames=40");
    CHECK(cfg.seed == 4);
    CHECK(cfg.train.gamma == 0.9);
    CHECK(cfg.simulation.frames == 40);
    std::ofstream(dir / "bad.json") << R"({"sead": 4})";
    CHECK_THROWS_AS(cfg.apply_file(dir / "bad.json"), ConfigError);
    std::ofstream(dir / "broken.json") << "{";
    CHECK_THROWS_AS(cfg.apply_file(dir / "broken.json"), ConfigError);
}

TEST_CASE("simulate is deterministic per seed") {
    const auto dir = test::temp_dir("simulate");
    const auto textures = cmd_synth_textures(2, 160, 3, dir / "src");
    CHECK(textures.size() == 2);
    RunConfig cfg;
    cfg.count = 3;
    cfg.simulation.frames = 8;
    cfg.seed = 11;
    std::ostringstream log;
    const auto a = cmd_simulate(cfg, dir / "src", dir / "a", log);
    const auto b = cmd_simulate(cfg, dir / "src", dir / "b", log);
    REQUIRE(a.size() == 3);
    CHECK(a[2].filename() == "scan_00002");
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(read_text(a[i] / "manifest.json") == read_text(b[i] / "manifest.json"));
        CHECK(scan::load_scan(a[i]) == scan::load_scan(b[i]));
    }
    cfg.seed = 12;
    const auto c = cmd_simulate(cfg, dir / "src", dir / "c", log);
    CHECK_FALSE(scan::load_scan(a[0]) == scan::load_scan(c[0]));

    const auto set = load_scan_set(dir / "a");
    REQUIRE(set.size() == 3);
    CHECK(set[1].id == "scan_00001");
    CHECK(load_scan_set(a[0]).size() == 1);
}

TEST_CASE("simulate rejects an empty source directory") {
    const auto dir = test::temp_dir("empty_sources");
    fs::create_directories(dir / "src");
    RunConfig cfg;
    std::ostringstream log;
    CHECK_THROWS_AS(cmd_simulate(cfg, dir / "src", dir / "out", log), ConfigError);
}

TEST_CASE("frame-sequence sources") {
    const auto dir = test::temp_dir("sequence");
    fs::create_directories(dir / "src" / "clip");
    for (int i = 0; i < 3; ++i) {
        image::write_pgm(image::quantize_8bit(test::texture(static_cast<std::uint64_t>(i), 140)),
                         dir / "src" / "clip" / ("f" + std::to_string(i) + ".pgm"));
    }
    image::write_pgm(image::quantize_8bit(test::texture(9, 140)), dir / "src" / "still.pgm");
    const auto sources = load_sources(dir / "src");
    REQUIRE(sources.size() == 2);
    std::size_t longest = 0;
    for (const auto& s : sources) longest = std::max(longest, s.frames.size());
    CHECK(longest == 3);
}

TEST_CASE("oracle focus rewrites f* and keeps one backup") {
    const auto dir = test::temp_dir("oracle");
    const auto sharp = image::quantize_8bit(image::extract_patch(test::texture(5, 96), 48, 48, 48));
    scan::FocalStackScan stack;
    for (int k = 0; k <= 10; ++k) stack.focal_grid.push_back(k / 10.0);
    for (double f_star : {0.3, 0.8}) {
        std::vector<image::GrayImage> pose;
        for (double f : stack.focal_grid) {
            pose.push_back(image::quantize_8bit(image::defocus_render(sharp, f, {5.0, f_star})));
        }
        stack.images.push_back(pose);
    }
    scan::save_scan(stack, dir / "stack");
    const auto original = read_text(dir / "stack" / "manifest.json");

    std::ostringstream log;
    const auto first = cmd_oracle_focus(dir / "stack", log);
    CHECK(first == std::vector<double>{0.3, 0.8});
    const auto second = cmd_oracle_focus(dir / "stack", log);
    CHECK(second == first);
    CHECK(read_text(dir / "stack" / "manifest.json.orig") == original);
    const auto labeled = std::get<scan::FocalStackScan>(scan::load_scan(dir / "stack"));
    REQUIRE(labeled.f_star.has_value());
    CHECK(*labeled.f_star == first);

    scan::SimulationConfig sim;
    sim.frames = 2;
    scan::save_scan(scan::build_simulated_scan(std::vector<image::GrayImage>{test::texture(1, 140)}, sim, "t"),
                    dir / "sim");
    CHECK_THROWS_AS(cmd_oracle_focus(dir / "sim", log), ConfigError);
}

TEST_CASE("eval writes reports and needs checkpoints for learned policies") {
    const auto dir = test::temp_dir("eval");
    const auto scans = test::simulated_set(2, 7, 20);
    for (const auto& s : scans) scan::save_scan(s.scan, dir / "scans" / s.id);
    RunConfig cfg;
    cfg.policy = "hc-mgm";
    cfg.compare = "fixed";
    cfg.bootstrap_iterations = 500;
    std::ostringstream log;
    const auto out = cmd_eval(cfg, dir / "scans", std::nullopt, std::nullopt, dir / "out", log);
    CHECK(fs::exists(dir / "out" / "report.json"));
    CHECK(fs::exists(dir / "out" / "paths.csv"));
    CHECK(fs::exists(dir / "out" / "compare" / "report.json"));
    REQUIRE(out.p_value.has_value());
    CHECK(*out.p_value > 0.0);
    CHECK(*out.p_value <= 1.0);

    cmd_export_paths(dir / "out" / "paths.csv", dir / "out" / "paths_w9.csv", 9);
    CHECK(bench::read_paths_csv(dir / "out" / "paths_w9.csv").size() == out.primary.aggregate.frames);

    cfg.policy = "rl-mgm";
    cfg.compare.clear();
    CHECK_THROWS_AS(cmd_eval(cfg, dir / "scans", std::nullopt, std::nullopt, dir / "out2", log), UsageError);
}
