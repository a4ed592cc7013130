#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "afrl/bench/evaluate.hpp"
#include "afrl/dqn/schedule.hpp"
#include "afrl/policy/policies.hpp"

namespace afrl::dqn {

struct TrainLogRow {
    int episode = 0;
    long experiences = 0;
    double epsilon = 1.0;
    std::optional<double> mean_loss;  // empty when no learn step ran this episode
    double mean_return = 0.0;         // episode return divided by episode length
    std::optional<double> val_mae;
    double wall_seconds = 0.0;
};

struct TrainResult {
    policy::PolicyNetworks best;  // lowest validation MAE seen (initial networks if never validated)
    policy::PolicyNetworks last;
    std::optional<double> best_val_mae;
    std::vector<TrainLogRow> log;
    long experiences = 0;
    int episodes = 0;
};

/// 95th percentile of the metric over training scans, sampled every 25th
/// frame at focal powers 0, 0.1, ..., 1.
policy::MetricNormalizer fit_metric_normalizer(std::span<const bench::LabeledScan> scans,
                                               const metrics::MetricKind& metric);

nlohmann::json config_to_json(const TrainConfig& cfg);

/// Deep Q-learning over simulated or recorded scans (one scan per episode,
/// initial power uniform in [0,1]). When `out_dir` is non-empty, writes
/// train_log.csv (appended per episode), best.ckpt and last.ckpt there.
/// `resume` seeds the online and target networks; `resume_experiences`
/// offsets the exploration schedule. Throws ArchitectureMismatchError when
/// `resume` holds another variant and NumericalError on a non-finite loss
/// (after writing diverged.json/diverged.ckpt to `out_dir`).
TrainResult train(std::span<const bench::LabeledScan> train_scans, std::span<const bench::LabeledScan> val_scans,
                  policy::PolicyKind variant, const TrainConfig& cfg, const std::filesystem::path& out_dir = {},
                  const policy::PolicyNetworks* resume = nullptr, long resume_experiences = 0);

/// Writes rows with the train_log.csv header.
void write_train_log(std::span<const TrainLogRow> rows, const std::filesystem::path& path);

}  // namespace afrl::dqn
