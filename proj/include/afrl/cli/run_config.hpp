#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "afrl/dqn/schedule.hpp"
#include "afrl/scan/scan.hpp"

namespace afrl::cli {

/// Flat view over every tunable. Precedence: defaults < config file < flags.
struct RunConfig {
    std::uint64_t seed = 0;
    int workers = 1;
    std::string policy = "hc-mgm";
    std::string compare;  // second policy for eval --compare
    int count = 1;
    scan::SimulationConfig simulation;
    double initial_f = 0.5;
    double fixed_f = 0.5;
    double mlr_sigma = 4.0;
    int smoothing_window = 5;
    int bootstrap_iterations = 10000;
    dqn::TrainConfig train;
    std::optional<int> warmup;  // defaults to 10 x batch_size when unset

    /// Every key accepted by from_json / apply.
    static const std::vector<std::string>& keys();

    /// Applies one key. Throws ConfigError for unknown keys or wrong types.
    void apply(const std::string& key, const nlohmann::json& value);
    /// Applies every entry of a flat object.
    void apply(const nlohmann::json& object);
    /// Parses "key=value"; the value is read as JSON, falling back to a string.
    void apply_assignment(const std::string& assignment);

    /// Throws ConfigError naming the first invalid field.
    void validate() const;

    /// TrainConfig with seed, workers, mlr_sigma and the warmup default folded in.
    [[nodiscard]] dqn::TrainConfig train_config() const;

    [[nodiscard]] nlohmann::json to_json() const;

    /// Applies a flat JSON object read from disk. Throws ConfigError on parse errors or unknown keys.
    void apply_file(const std::filesystem::path& path);
};

}  // namespace afrl::cli
