#include <malloc.h>

#include <algorithm>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "afrl/cli/commands.hpp"
#include "afrl/error.hpp"

namespace {

using afrl::cli::RunConfig;
namespace fs = std::filesystem;

/// Options shared by every subcommand; merged as defaults < --config < flags.
struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::vector<std::string> sets;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "Flat JSON config file")->check(CLI::ExistingFile);
        app->add_option("--seed", seed, "Seed for every random draw");
        app->add_option("--workers", workers, "Worker threads (default: available cores)")->check(CLI::PositiveNumber);
        app->add_option("--set", sets, "Override a config key, e.g. --set batch_size=32")->take_all();
    }

    RunConfig resolve(const std::vector<std::pair<std::string, std::string>>& flags = {}) const {
        RunConfig cfg;
        cfg.workers = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
        if (!config.empty()) cfg.apply_file(config);
        for (const auto& [k, v] : flags) {
            if (!v.empty()) cfg.apply_assignment(k + "=" + v);
        }
        for (const auto& s : sets) cfg.apply_assignment(s);
        if (seed) cfg.seed = *seed;
        if (workers) cfg.workers = *workers;
        cfg.validate();
        return cfg;
    }
};

std::optional<fs::path> opt_path(const std::string& s) {
    return s.empty() ? std::nullopt : std::optional<fs::path>(s);
}

}  // namespace

int main(int argc, char** argv) {
    // Training allocates large short-lived matrices; keep them on the heap
    // instead of paying an mmap/munmap round trip per allocation.
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    mallopt(M_TOP_PAD, 256 << 20);

    CLI::App app{"Dynamic autofocus: scan simulation, DQN training and policy evaluation"};
    app.require_subcommand(1);

    Common sim_opts, tex_opts, train_opts, eval_opts;
    std::string sources, scans, val, out, resume, ckpt, compare_ckpt, stack_dir, paths_in, policy, compare;
    std::string count, frames;
    int tex_count = 12, tex_size = 320, window = 5;

    auto* simulate = app.add_subcommand("simulate", "Render simulated focal-time scans from PGM sources");
    sim_opts.attach(simulate);
    simulate->add_option("--sources", sources, "Directory of PGM stills or frame-sequence subdirectories")->required();
    simulate->add_option("--out", out, "Output directory for scan_NNNNN folders")->required();
    simulate->add_option("--count", count, "Number of scans");
    simulate->add_option("--frames", frames, "Frames per scan");

    auto* textures = app.add_subcommand("synth-textures", "Write synthetic textured stills usable as sources");
    tex_opts.attach(textures);
    textures->add_option("--count", tex_count, "Number of textures")->check(CLI::PositiveNumber);
    textures->add_option("--size", tex_size, "Side length in pixels")->check(CLI::Range(32, 8192));
    textures->add_option("--out", out, "Output directory")->required();

    auto* train = app.add_subcommand("train", "Train a learned policy with deep Q-learning");
    train_opts.attach(train);
    train->add_option("--scans", scans, "Training scan directory")->required();
    train->add_option("--val", val, "Validation scan directory")->required();
    train->add_option("--policy,--variant", policy, "rl-mgm | rl-mlr | rl-cnn");
    train->add_option("--out", out, "Output directory for checkpoints and train_log.csv")->required();
    train->add_option("--resume", resume, "Checkpoint to continue from")->check(CLI::ExistingFile);

    auto* eval = app.add_subcommand("eval", "Evaluate a policy over a scan set");
    eval_opts.attach(eval);
    eval->add_option("--scans", scans, "Scan directory")->required();
    eval->add_option("--policy", policy, "fixed | hc-mgm | hc-mlr | rl-mgm | rl-mlr | rl-cnn");
    eval->add_option("--ckpt", ckpt, "Checkpoint for a learned policy");
    eval->add_option("--compare", compare, "Second policy; adds a paired significance test");
    eval->add_option("--compare-ckpt", compare_ckpt, "Checkpoint for the --compare policy");
    eval->add_option("--out", out, "Output directory for report.json and paths.csv")->required();

    auto* oracle = app.add_subcommand("oracle-focus", "Compute f* of a focal-stack scan by global metric search");
    oracle->add_option("--scan", stack_dir, "Focal-stack scan directory")->required();

    auto* export_paths = app.add_subcommand("export-paths", "Re-smooth a paths.csv with another window");
    export_paths->add_option("--paths", paths_in, "Input paths.csv")->required()->check(CLI::ExistingFile);
    export_paths->add_option("--out", out, "Output CSV")->required();
    export_paths->add_option("--window", window, "Moving-average window in frames")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) {
            const auto cfg = sim_opts.resolve({{"count", count}, {"frames", frames}});
            afrl::cli::cmd_simulate(cfg, sources, out, std::cout);
        } else if (textures->parsed()) {
            const auto cfg = tex_opts.resolve();
            for (const auto& p : afrl::cli::cmd_synth_textures(tex_count, tex_size, cfg.seed, out)) {
                std::cout << p.string() << '\n';
            }
        } else if (train->parsed()) {
            const auto cfg = train_opts.resolve({{"policy", policy.empty() ? "" : "\"" + policy + "\""}});
            afrl::cli::cmd_train(cfg, scans, val, out, opt_path(resume), std::cout);
        } else if (eval->parsed()) {
            const auto cfg = eval_opts.resolve({{"policy", policy.empty() ? "" : "\"" + policy + "\""},
                                                {"compare", compare.empty() ? "" : "\"" + compare + "\""}});
            afrl::cli::cmd_eval(cfg, scans, opt_path(ckpt), opt_path(compare_ckpt), out, std::cout);
        } else if (oracle->parsed()) {
            afrl::cli::cmd_oracle_focus(stack_dir, std::cout);
        } else if (export_paths->parsed()) {
            afrl::cli::cmd_export_paths(paths_in, out, window);
        }
    } catch (const afrl::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const afrl::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
