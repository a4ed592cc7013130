#include "afrl/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>
#include <thread>

#include "afrl/bench/export.hpp"
#include "afrl/bench/significance.hpp"
#include "afrl/error.hpp"
#include "afrl/image/pgm.hpp"
#include "afrl/neural/checkpoint.hpp"
#include "afrl/scan/scan_io.hpp"
#include "afrl/scan/texture.hpp"

namespace afrl::cli {

namespace {

std::vector<fs::path> sorted_pgms(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".pgm") out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads; rethrows the first failure.
template <typename Fn>
void parallel_for(int n, int workers, Fn fn) {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex mutex;
    auto work = [&] {
        try {
            for (int i = next++; i < n; i = next++) fn(i);
        } catch (...) {
            const std::lock_guard lock(mutex);
            if (!failure) failure = std::current_exception();
            next = n;
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < std::min(workers, n); ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

std::optional<policy::PolicyNetworks> load_networks(policy::PolicyKind kind, const std::optional<fs::path>& ckpt) {
    if (!policy::is_learned(kind)) return std::nullopt;
    if (!ckpt) {
        throw UsageError("policy " + std::string(policy::policy_name(kind)) + " needs a checkpoint (--ckpt)");
    }
    return policy::PolicyNetworks::from_checkpoint(neural::load_checkpoint(*ckpt), kind);
}

bench::EvalReport evaluate(const RunConfig& cfg, const std::string& name, const std::optional<fs::path>& ckpt,
                           std::span<const bench::LabeledScan> scans) {
    const auto kind = policy::parse_policy_kind(name);
    const auto nets = load_networks(kind, ckpt);
    const auto shared = nets ? std::make_shared<const policy::PolicyNetworks>(*nets) : nullptr;
    const bench::PolicyFactory factory = [kind, shared, &cfg] {
        return policy::make_policy(kind, shared.get(), cfg.fixed_f, cfg.mlr_sigma);
    };
    return bench::evaluate_policy(factory, scans, cfg.initial_f, cfg.workers, {}, cfg.seed);
}

void write_outputs(const bench::EvalReport& report, const RunConfig& cfg, const fs::path& out) {
    bench::write_report_json(report, out / "report.json", cfg.to_json());
    bench::export_paths(report, out / "paths.csv", cfg.smoothing_window);
}

}  // namespace

std::vector<bench::LabeledScan> load_scan_set(const fs::path& root) {
    std::vector<fs::path> dirs;
    if (fs::exists(root / "manifest.json")) {
        dirs.push_back(root);
    } else {
        if (!fs::is_directory(root)) throw ConfigError("scan directory " + root.string() + " does not exist");
        dirs = scan::list_scan_dirs(root);
    }
    if (dirs.empty()) throw ConfigError("no scan directories under " + root.string());
    std::vector<bench::LabeledScan> out;
    for (const auto& d : dirs) {
        try {
            out.push_back({d.filename().string(), scan::load_scan(d)});
        } catch (const FormatError& e) {
            throw FormatError("loading " + d.string() + ": " + e.what());
        }
    }
    return out;
}

std::vector<Source> load_sources(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ConfigError("sources directory " + dir.string() + " does not exist");
    std::vector<Source> out;
    for (const auto& p : sorted_pgms(dir)) out.push_back({p.stem().string(), {image::read_pgm(p)}});
    std::vector<fs::path> subdirs;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_directory()) subdirs.push_back(e.path());
    }
    std::sort(subdirs.begin(), subdirs.end());
    for (const auto& sub : subdirs) {
        const auto frames = sorted_pgms(sub);
        if (frames.empty()) continue;
        Source s{sub.filename().string(), {}};
        for (const auto& f : frames) s.frames.push_back(image::read_pgm(f));
        out.push_back(std::move(s));
    }
    if (out.empty()) throw ConfigError("no PGM stills or frame sequences in " + dir.string());
    return out;
}

std::uint64_t scan_seed(std::uint64_t seed, int index) noexcept {
    // splitmix64 finalizer over (seed, index)
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(index) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::vector<fs::path> cmd_simulate(const RunConfig& cfg, const fs::path& sources, const fs::path& out,
                                   std::ostream& log) {
    cfg.validate();
    const auto srcs = load_sources(sources);
    fs::create_directories(out);
    std::vector<fs::path> dirs(static_cast<std::size_t>(cfg.count));
    std::vector<scan::SimulatedScan> summaries(dirs.size());
    parallel_for(cfg.count, cfg.workers, [&](int i) {
        const auto& src = srcs[static_cast<std::size_t>(i) % srcs.size()];
        scan::SimulationConfig sim = cfg.simulation;
        sim.walk.seed = scan_seed(cfg.seed, i);
        auto s = scan::build_simulated_scan(src.frames, sim, src.id);
        char name[32];
        std::snprintf(name, sizeof name, "scan_%05d", i);
        const auto idx = static_cast<std::size_t>(i);
        dirs[idx] = out / name;
        scan::save_scan(s, dirs[idx]);
        s.frames.clear();
        summaries[idx] = std::move(s);
    });
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        const auto& s = summaries[i];
        const auto [lo, hi] = std::minmax_element(s.f_star.begin(), s.f_star.end());
        char line[200];
        std::snprintf(line, sizeof line, "%s  source=%s  frames=%zu  sigma0=%.3f  f*=[%.3f, %.3f]",
                      dirs[i].filename().string().c_str(), s.source_id.c_str(), s.f_star.size(), s.sigma0, *lo, *hi);
        log << line << '\n';
    }
    return dirs;
}

std::vector<fs::path> cmd_synth_textures(int count, int size, std::uint64_t seed, const fs::path& out) {
    if (count < 1 || size < scan::kPatchSize) throw ConfigError("need count >= 1 and size >= 32");
    fs::create_directories(out);
    std::vector<fs::path> paths;
    for (int i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "texture_%03d.pgm", i);
        paths.push_back(out / name);
        image::write_pgm(scan::synthesize_texture(size, size, scan_seed(seed, i)), paths.back());
    }
    return paths;
}

dqn::TrainResult cmd_train(const RunConfig& cfg, const fs::path& scans, const fs::path& val, const fs::path& out,
                           const std::optional<fs::path>& resume, std::ostream& log) {
    cfg.validate();
    const auto kind = policy::parse_policy_kind(cfg.policy);
    if (!policy::is_learned(kind)) {
        throw UsageError("cannot train '" + cfg.policy + "'; trainable policies: rl-mgm, rl-mlr, rl-cnn");
    }
    const auto train_set = load_scan_set(scans);
    const auto val_set = load_scan_set(val);
    std::optional<policy::PolicyNetworks> start;
    long start_experiences = 0;
    if (resume) {
        const auto ckpt = neural::load_checkpoint(*resume);
        start = policy::PolicyNetworks::from_checkpoint(ckpt, kind);
        start_experiences = ckpt.metadata.value("experiences", 0L);
    }
    auto result = dqn::train(train_set, val_set, kind, cfg.train_config(), out, start ? &*start : nullptr,
                             start_experiences);
    char line[200];
    std::snprintf(line, sizeof line, "trained %s: %ld experiences, %d episodes, best validation MAE %s",
                  cfg.policy.c_str(), result.experiences, result.episodes,
                  result.best_val_mae ? std::to_string(*result.best_val_mae).c_str() : "n/a");
    log << line << '\n';
    return result;
}

EvalOutputs cmd_eval(const RunConfig& cfg, const fs::path& scans, const std::optional<fs::path>& ckpt,
                     const std::optional<fs::path>& compare_ckpt, const fs::path& out, std::ostream& log) {
    cfg.validate();
    // Fail on a missing checkpoint before loading any scans.
    load_networks(policy::parse_policy_kind(cfg.policy), ckpt);
    if (!cfg.compare.empty()) load_networks(policy::parse_policy_kind(cfg.compare), compare_ckpt);

    const auto set = load_scan_set(scans);
    EvalOutputs outputs{evaluate(cfg, cfg.policy, ckpt, set), std::nullopt, std::nullopt};
    write_outputs(outputs.primary, cfg, out);
    log << bench::format_summary(outputs.primary) << '\n';
    if (!cfg.compare.empty()) {
        outputs.compared = evaluate(cfg, cfg.compare, compare_ckpt, set);
        write_outputs(*outputs.compared, cfg, out / "compare");
        outputs.p_value = bench::paired_significance(outputs.primary, *outputs.compared, cfg.bootstrap_iterations,
                                                     cfg.seed);
        log << bench::format_summary(*outputs.compared) << '\n';
        char line[120];
        std::snprintf(line, sizeof line, "paired bootstrap p = %.4g (%s vs %s, %d resamples)", *outputs.p_value,
                      cfg.policy.c_str(), cfg.compare.c_str(), cfg.bootstrap_iterations);
        log << line << '\n';
    }
    return outputs;
}

std::vector<double> cmd_oracle_focus(const fs::path& stack_dir, std::ostream& log) {
    const auto loaded = scan::load_scan(stack_dir);
    const auto* stack = std::get_if<scan::FocalStackScan>(&loaded);
    if (stack == nullptr) throw ConfigError(stack_dir.string() + " is a simulated scan, not a focal-stack scan");
    std::vector<double> f_star;
    for (const auto& pose : stack->images) f_star.push_back(scan::oracle_optimal_focus(pose, stack->focal_grid));

    const fs::path manifest = stack_dir / "manifest.json";
    const fs::path backup = stack_dir / "manifest.json.orig";
    if (!fs::exists(backup)) fs::copy_file(manifest, backup);
    nlohmann::json j;
    {
        std::ifstream in(manifest);
        j = nlohmann::json::parse(in);
    }
    j["f_star"] = f_star;
    std::ofstream out(manifest, std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) throw FormatError("cannot rewrite " + manifest.string());
    log << "wrote f* for " << f_star.size() << " poses to " << manifest.string() << '\n';
    return f_star;
}

void cmd_export_paths(const fs::path& in_csv, const fs::path& out_csv, int window) {
    auto rows = bench::read_paths_csv(in_csv);
    bench::resmooth(rows, window);
    bench::write_paths_csv(rows, out_csv);
}

}  // namespace afrl::cli
