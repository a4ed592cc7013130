#include "afrl/policy/history.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "afrl/error.hpp"

namespace afrl::policy {

void MetricNormalizer::validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw ConfigError("metric normalizer scale must be positive and finite, got " + std::to_string(scale));
    }
}

MetricNormalizer fit_normalizer(std::vector<double> samples) {
    if (samples.empty()) throw ConfigError("cannot fit a metric normalizer without samples");
    std::sort(samples.begin(), samples.end());
    const double pos = 0.95 * static_cast<double>(samples.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, samples.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    MetricNormalizer n{samples[lo] + frac * (samples[hi] - samples[lo])};
    n.validate();
    return n;
}

PolicyHistory::PolicyHistory(int observation_width, int capacity)
    : width_(observation_width),
      capacity_(capacity),
      observations_(static_cast<std::size_t>(observation_width) * capacity, 0.0f),
      focal_(static_cast<std::size_t>(capacity), 0.5),
      zeros_(static_cast<std::size_t>(observation_width), 0.0f) {
    if (observation_width < 1 || capacity < 1) throw ShapeError("history dimensions must be positive");
}

void PolicyHistory::reset(double initial_f) {
    head_ = 0;
    filled_ = 0;
    initial_f_ = initial_f;
    std::fill(observations_.begin(), observations_.end(), 0.0f);
    std::fill(focal_.begin(), focal_.end(), initial_f);
}

void PolicyHistory::push(std::span<const float> observation, double f) {
    if (static_cast<int>(observation.size()) != width_) {
        throw ShapeError("observation width " + std::to_string(observation.size()) + " does not match history width " +
                         std::to_string(width_));
    }
    head_ = (head_ + 1) % capacity_;
    std::copy(observation.begin(), observation.end(),
              observations_.begin() + static_cast<std::ptrdiff_t>(head_) * width_);
    focal_[static_cast<std::size_t>(head_)] = f;
    filled_ = std::min(filled_ + 1, capacity_);
}

std::span<const float> PolicyHistory::observation(int age) const {
    if (age < 0 || age >= capacity_) throw IndexError("history age out of range");
    if (age >= filled_) return zeros_;
    return std::span<const float>(observations_).subspan(static_cast<std::size_t>(slot(age)) * width_, width_);
}

double PolicyHistory::focal_power(int age) const {
    if (age < 0 || age >= capacity_) throw IndexError("history age out of range");
    return age < filled_ ? focal_[static_cast<std::size_t>(slot(age))] : initial_f_;
}

std::vector<float> assemble_state(const PolicyHistory& history, const MetricNormalizer& normalizer) {
    const int n = history.capacity();
    std::vector<float> state;
    state.reserve(static_cast<std::size_t>(state_width(history.observation_width(), n)));
    if (history.observation_width() == 1) {
        for (int age = 0; age < n; ++age) {
            state.push_back(static_cast<float>(history.observation(age)[0] / normalizer.scale));
            state.push_back(static_cast<float>(history.focal_power(age)));
        }
    } else {
        for (int age = 0; age < n; ++age) {
            const auto obs = history.observation(age);
            state.insert(state.end(), obs.begin(), obs.end());
        }
        for (int age = 0; age < n; ++age) state.push_back(static_cast<float>(history.focal_power(age)));
    }
    return state;
}

}  // namespace afrl::policy
