#include "afrl/scan/walk.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "afrl/error.hpp"

namespace afrl::scan {

void WalkConfig::validate() const {
    auto decay_ok = [](double d) { return d > 0.0 && d < 1.0; };
    auto nonneg = [](double v) { return v >= 0.0 && !std::isnan(v); };
    if (!decay_ok(crop_velocity_decay) || !decay_ok(focus_velocity_decay)) {
        throw ConfigError("walk velocity decays must lie in (0,1)");
    }
    if (!nonneg(crop_noise_std) || !nonneg(focus_noise_std)) {
        throw ConfigError("walk noise standard deviations must be >= 0");
    }
    if (!nonneg(crop_max_speed) || !nonneg(focus_max_speed)) {
        throw ConfigError("walk speed caps must be >= 0");
    }
}

void walk_step(std::span<double> position, std::span<double> velocity, const WalkParams& params,
               std::span<const double> lower, std::span<const double> upper, Rng& rng) {
    if (velocity.size() != position.size() || lower.size() != position.size() ||
        upper.size() != position.size()) {
        throw ShapeError("walk state and bounds must have matching dimensions");
    }
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t i = 0; i < position.size(); ++i) {
        if (!(lower[i] <= upper[i])) throw PreconditionError("walk bounds are inverted");
        double v = params.velocity_decay * velocity[i] + params.noise_std * noise(rng);
        v = std::clamp(v, -params.max_speed, params.max_speed);
        double x = position[i] + v;
        if (lower[i] == upper[i]) {
            x = lower[i];
        } else {
            while (x > upper[i] || x < lower[i]) {
                x = x > upper[i] ? 2.0 * upper[i] - x : 2.0 * lower[i] - x;
                v = -v;
            }
        }
        position[i] = x;
        velocity[i] = v;
    }
}

}  // namespace afrl::scan
