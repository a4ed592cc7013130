#pragma once

#include <array>
#include <span>
#include <vector>

namespace afrl::policy {

inline constexpr int kHistoryLength = 8;
inline constexpr double kFocalStep = 0.05;
/// Action index -> focal power change. Index 1 is "stay".
inline constexpr std::array<double, 3> kActions{-kFocalStep, 0.0, kFocalStep};
inline constexpr int kEncodingWidth = 8;

/// Width of the assembled state for scalar-metric (1) or encoded (8) observations.
constexpr int state_width(int observation_width, int history = kHistoryLength) {
    return observation_width == 1 ? 2 * history : history * (observation_width + 1);
}

/// Divides raw metric values before they enter the Q-network.
struct MetricNormalizer {
    double scale = 1.0;

    /// Throws ConfigError unless scale is positive and finite.
    void validate() const;
};

/// 95th percentile (linear interpolation between order statistics) of metric samples.
/// Throws ConfigError when `samples` is empty or the percentile is not positive.
MetricNormalizer fit_normalizer(std::vector<double> samples);

/// The N most recent (observation, focal power) pairs, newest first.
/// Slots not yet filled read as a zero observation at the initial focal power.
class PolicyHistory {
public:
    explicit PolicyHistory(int observation_width = 1, int capacity = kHistoryLength);

    void reset(double initial_f);
    /// Throws ShapeError when the observation width differs from construction.
    void push(std::span<const float> observation, double f);

    [[nodiscard]] int capacity() const noexcept { return capacity_; }
    [[nodiscard]] int observation_width() const noexcept { return width_; }
    [[nodiscard]] int filled() const noexcept { return filled_; }

    /// Observation `age` steps old (0 = newest); zeros for an unfilled slot.
    [[nodiscard]] std::span<const float> observation(int age) const;
    [[nodiscard]] double focal_power(int age) const;

private:
    [[nodiscard]] int slot(int age) const noexcept { return (head_ - age + capacity_) % capacity_; }

    int width_;
    int capacity_;
    int head_ = 0;
    int filled_ = 0;
    double initial_f_ = 0.5;
    std::vector<float> observations_;
    std::vector<double> focal_;
    std::vector<float> zeros_;
};

/// Scalar observations: [phi_0 / scale, f_0, phi_1 / scale, f_1, ...] (width 2N).
/// Encoded observations: N encodings newest first, then N focal powers (width N * 9).
std::vector<float> assemble_state(const PolicyHistory& history, const MetricNormalizer& normalizer);

}  // namespace afrl::policy
