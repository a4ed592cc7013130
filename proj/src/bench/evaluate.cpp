#include "afrl/bench/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include "afrl/error.hpp"

namespace afrl::bench {

Aggregate aggregate_errors(std::span<const double> errors) {
    Aggregate agg;
    agg.frames = errors.size();
    if (errors.empty()) return agg;
    const double n = static_cast<double>(errors.size());
    double sum = 0.0;
    std::size_t in_focus = 0;
    for (double e : errors) {
        sum += e;
        if (e < kInFocusThreshold) ++in_focus;
    }
    agg.mae = sum / n;
    double sq = 0.0;
    for (double e : errors) sq += (e - agg.mae) * (e - agg.mae);
    agg.error_std = std::sqrt(sq / n);
    agg.in_focus_fraction = static_cast<double>(in_focus) / n;
    return agg;
}

ScanReport rollout(policy::FocusPolicy& policy, const LabeledScan& labeled, double initial_f) {
    const int frames = scan::frame_count(labeled.scan);
    if (frames == 0 || !scan::optimal_focus(labeled.scan, 0)) {
        throw ConfigError("scan '" + labeled.id + "' has no ground-truth focus to evaluate against");
    }
    policy.reset(initial_f);
    double f = policy.focal_power();
    ScanReport report;
    report.scan_id = labeled.id;
    report.frames.reserve(static_cast<std::size_t>(frames));
    std::vector<double> errors;
    errors.reserve(static_cast<std::size_t>(frames));
    for (int t = 0; t < frames; ++t) {
        const image::GrayImage patch = scan::env_patch(labeled.scan, t, f);
        f = policy.step(patch);
        const double f_star = *scan::optimal_focus(labeled.scan, t);
        const double err = std::abs(f_star - f);
        report.frames.push_back({t, f, f_star, err});
        errors.push_back(err);
    }
    report.aggregate = aggregate_errors(errors);
    return report;
}

EvalReport evaluate_policy(const PolicyFactory& make_policy, std::span<const LabeledScan> scans, double initial_f,
                           int workers, std::span<const double> per_scan_initial_f, std::uint64_t seed) {
    if (scans.empty()) throw ConfigError("no scans to evaluate");
    if (!per_scan_initial_f.empty() && per_scan_initial_f.size() != scans.size()) {
        throw ConfigError("per-scan initial focal powers do not match the scan count");
    }
    if (!(initial_f >= 0.0 && initial_f <= 1.0)) throw DomainError("initial focal power must lie in [0,1]");

    std::vector<ScanReport> results(scans.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::string descriptor;

    auto work = [&](bool record_descriptor) {
        try {
            const auto policy = make_policy();
            if (record_descriptor) descriptor = policy->descriptor();
            for (std::size_t i = next++; i < scans.size(); i = next++) {
                const double f0 = per_scan_initial_f.empty() ? initial_f : per_scan_initial_f[i];
                results[i] = rollout(*policy, scans[i], f0);
            }
        } catch (...) {
            const std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = scans.size();
        }
    };

    const int threads = std::clamp(workers, 1, static_cast<int>(scans.size()));
    std::vector<std::thread> pool;
    for (int w = 1; w < threads; ++w) pool.emplace_back(work, false);
    work(true);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    std::sort(results.begin(), results.end(),
              [](const ScanReport& a, const ScanReport& b) { return a.scan_id < b.scan_id; });

    EvalReport report;
    report.policy = descriptor;
    report.seed = seed;
    report.initial_f = initial_f;
    std::vector<double> errors;
    for (const auto& s : results) {
        for (const auto& fr : s.frames) errors.push_back(fr.abs_error);
    }
    report.aggregate = aggregate_errors(errors);
    report.scans = std::move(results);
    return report;
}

nlohmann::json report_to_json(const EvalReport& report, const nlohmann::json& config) {
    nlohmann::json j;
    j["policy"] = report.policy;
    j["seed"] = report.seed;
    j["initial_f"] = report.initial_f;
    j["mae"] = report.aggregate.mae;
    j["error_std"] = report.aggregate.error_std;
    j["error_std_definition"] = "population standard deviation of per-frame absolute errors";
    j["in_focus_fraction"] = report.aggregate.in_focus_fraction;
    j["in_focus_threshold"] = kInFocusThreshold;
    j["frames"] = report.aggregate.frames;
    j["scans"] = nlohmann::json::array();
    for (const auto& s : report.scans) {
        j["scans"].push_back({{"scan_id", s.scan_id},
                              {"frames", s.aggregate.frames},
                              {"mae", s.aggregate.mae},
                              {"error_std", s.aggregate.error_std},
                              {"in_focus_fraction", s.aggregate.in_focus_fraction}});
    }
    j["config"] = config;
    return j;
}

void write_report_json(const EvalReport& report, const std::filesystem::path& path, const nlohmann::json& config) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    out << report_to_json(report, config).dump(2) << '\n';
    if (!out) throw FormatError("cannot write " + path.string());
}

std::string format_summary(const EvalReport& report) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-8s MAE %.3f +- %.3f | in focus %5.1f%% | %zu frames", report.policy.c_str(),
                  report.aggregate.mae, report.aggregate.error_std, 100.0 * report.aggregate.in_focus_fraction,
                  report.aggregate.frames);
    return buf;
}

}  // namespace afrl::bench
