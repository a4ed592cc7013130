#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "afrl/bench/evaluate.hpp"
#include "afrl/cli/run_config.hpp"
#include "afrl/dqn/trainer.hpp"

namespace afrl::cli {

namespace fs = std::filesystem;

/// Scan directories under `root` (or `root` itself when it holds a manifest),
/// labelled by directory name.
std::vector<bench::LabeledScan> load_scan_set(const fs::path& root);

/// Loose *.pgm files in `dir` are stills; subdirectories holding *.pgm files
/// are frame sequences (sorted by name). Throws ConfigError when none exist.
struct Source {
    std::string id;
    std::vector<image::GrayImage> frames;
};
std::vector<Source> load_sources(const fs::path& dir);

/// Seed of the i-th scan simulated under `seed`.
std::uint64_t scan_seed(std::uint64_t seed, int index) noexcept;

/// Writes cfg.count scans as out/scan_00000, ... cycling over the sources.
std::vector<fs::path> cmd_simulate(const RunConfig& cfg, const fs::path& sources, const fs::path& out,
                                   std::ostream& log);

/// Writes `count` synthetic textures (size x size PGMs) for use as still sources.
std::vector<fs::path> cmd_synth_textures(int count, int size, std::uint64_t seed, const fs::path& out);

dqn::TrainResult cmd_train(const RunConfig& cfg, const fs::path& scans, const fs::path& val, const fs::path& out,
                           const std::optional<fs::path>& resume, std::ostream& log);

struct EvalOutputs {
    bench::EvalReport primary;
    std::optional<bench::EvalReport> compared;
    std::optional<double> p_value;
};

/// Evaluates cfg.policy (and cfg.compare when set); writes report.json and
/// paths.csv (plus compare/ for the second policy). Learned policies need a
/// checkpoint (UsageError otherwise).
EvalOutputs cmd_eval(const RunConfig& cfg, const fs::path& scans, const std::optional<fs::path>& ckpt,
                     const std::optional<fs::path>& compare_ckpt, const fs::path& out, std::ostream& log);

/// Computes per-pose f* of a focal-stack scan by global metric search and
/// writes it into manifest.json, keeping manifest.json.orig as a backup.
std::vector<double> cmd_oracle_focus(const fs::path& stack_dir, std::ostream& log);

/// Re-smooths an existing paths.csv with another window.
void cmd_export_paths(const fs::path& in_csv, const fs::path& out_csv, int window);

}  // namespace afrl::cli
