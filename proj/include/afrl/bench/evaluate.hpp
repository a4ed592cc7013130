#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "afrl/policy/policies.hpp"
#include "afrl/scan/scan.hpp"

namespace afrl::bench {

/// Frames whose absolute focal power error is strictly below this count as in focus.
inline constexpr double kInFocusThreshold = 0.1;

struct LabeledScan {
    std::string id;
    scan::Scan scan;
};

/// Post-action state of one frame: the policy saw frame t and moved to f.
struct FrameRecord {
    int t = 0;
    double f = 0.0;
    double f_star = 0.0;
    double abs_error = 0.0;
};

struct Aggregate {
    double mae = 0.0;
    double error_std = 0.0;  // population std of per-frame absolute errors
    double in_focus_fraction = 0.0;
    std::size_t frames = 0;
};

struct ScanReport {
    std::string scan_id;
    std::vector<FrameRecord> frames;
    Aggregate aggregate;
};

struct EvalReport {
    std::string policy;
    std::uint64_t seed = 0;
    double initial_f = 0.5;
    std::vector<ScanReport> scans;  // sorted by scan_id
    Aggregate aggregate;
};

Aggregate aggregate_errors(std::span<const double> errors);

using PolicyFactory = std::function<std::unique_ptr<policy::FocusPolicy>()>;

/// Greedy closed-loop rollout of one scan: at frame t the policy observes the
/// centred patch at its current power and the error |f*_t - f_{t+1}| is recorded.
ScanReport rollout(policy::FocusPolicy& policy, const LabeledScan& scan, double initial_f);

/// Rolls a fresh policy from `make_policy()` over every scan and aggregates
/// per-frame errors. Scans are distributed over `workers` threads; the result
/// is independent of the worker count. `per_scan_initial_f`, when non-empty,
/// overrides `initial_f` per scan (same order as `scans`).
/// Throws ConfigError when a scan lacks ground truth or `scans` is empty.
EvalReport evaluate_policy(const PolicyFactory& make_policy, std::span<const LabeledScan> scans,
                           double initial_f = 0.5, int workers = 1, std::span<const double> per_scan_initial_f = {},
                           std::uint64_t seed = 0);

/// Aggregates plus per-scan summaries; `config` is echoed under "config".
nlohmann::json report_to_json(const EvalReport& report, const nlohmann::json& config = nlohmann::json::object());
void write_report_json(const EvalReport& report, const std::filesystem::path& path,
                       const nlohmann::json& config = nlohmann::json::object());

/// "MAE 0.102 +- 0.138 | in focus 67.9%" style summary line.
std::string format_summary(const EvalReport& report);

}  // namespace afrl::bench
