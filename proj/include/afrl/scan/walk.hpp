#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>

namespace afrl::scan {

using Rng = std::mt19937_64;

/// Parameters of one damped-velocity random walk.
struct WalkParams {
    double velocity_decay = 0.9;
    double noise_std = 0.0;
    /// Per-component cap on |velocity|; bounds the displacement of a single step.
    double max_speed = std::numeric_limits<double>::infinity();
};

/// The two walks driving a simulated scan: the crop rectangle (pixels) and the
/// optimal focal power (normalized units).
struct WalkConfig {
    double crop_velocity_decay = 0.9;
    double crop_noise_std = 1.5;
    double crop_max_speed = 8.0;
    double focus_velocity_decay = 0.9;
    double focus_noise_std = 0.004;
    double focus_max_speed = 0.05;
    std::uint64_t seed = 0;

    /// Decays must lie in (0,1); noise stds and speed caps must be >= 0.
    void validate() const;

    [[nodiscard]] WalkParams crop() const { return {crop_velocity_decay, crop_noise_std, crop_max_speed}; }
    [[nodiscard]] WalkParams focus() const { return {focus_velocity_decay, focus_noise_std, focus_max_speed}; }
};

/// Advances a walk in place:
///   v <- clamp(decay * v + N(0, noise_std), +-max_speed);  x <- x + v
/// then reflects x back into [lower, upper] per component, negating that
/// velocity component on every reflection. One normal deviate is drawn per
/// component regardless of noise_std, so the RNG stream does not depend on it.
void walk_step(std::span<double> position, std::span<double> velocity, const WalkParams& params,
               std::span<const double> lower, std::span<const double> upper, Rng& rng);

}  // namespace afrl::scan
