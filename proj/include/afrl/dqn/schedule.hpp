#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "afrl/neural/network.hpp"
#include "afrl/neural/params.hpp"
#include "afrl/scan/walk.hpp"

namespace afrl::dqn {

struct TrainConfig {
    double gamma = 0.99;
    double ema_beta = 0.005;
    double epsilon_start = 1.0;
    double epsilon_end = 0.1;
    long epsilon_decay_span = 2'000'000;
    long replay_capacity = 2'500'000;
    int batch_size = 64;
    int warmup = 640;
    int learn_every = 1;
    long total_experiences = 0;
    double learning_rate = 1e-5;
    double rmsprop_decay = 0.95;
    double rmsprop_epsilon = 1e-8;
    int validate_every = 25;  // episodes
    std::uint64_t seed = 0;
    double mlr_sigma = 4.0;
    int workers = 1;  // validation rollouts only

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
};

/// epsilon_start * (epsilon_end / epsilon_start)^(min(t, span) / span); exact at both endpoints.
double epsilon(long experiences, const TrainConfig& cfg);

/// Uniform random action with probability eps, otherwise the greedy action
/// (ties toward stay, then -h). Draws exactly one uniform, plus one action
/// index when exploring.
int select_action(std::span<const float> q, double eps, scan::Rng& rng);

/// y_i = r_i + gamma * max_a next_q(i, a). No terminal cut.
std::vector<double> td_targets(std::span<const double> rewards, const neural::RowMatrix<float>& next_q, double gamma);

/// Bootstrapped targets using `target` on the next states (rows of `next_states`).
std::vector<double> td_targets(std::span<const double> rewards, const neural::QNetwork& target,
                               const neural::RowMatrix<float>& next_states, double gamma);

/// Huber loss between Q(s_i, a_i) and y_i over the taken actions only. Fills
/// d_q ([batch, 3]) with dLoss/dQ, zero for actions not taken.
/// Throws ShapeError when q, actions and targets disagree in length.
double taken_action_loss(const neural::RowMatrix<float>& q, std::span<const int> actions, std::span<const double> y,
                         neural::RowMatrix<float>& d_q);

/// target <- beta * online + (1 - beta) * target, tensor by tensor.
/// Throws ShapeError when the sets are not aligned.
template <typename T>
void ema_update(neural::BasicParamSet<T>& target, const neural::BasicParamSet<T>& online, double beta) {
    target.check_aligned(online);
    const T b = static_cast<T>(beta);
    const T keep = static_cast<T>(1.0 - beta);
    for (std::size_t i = 0; i < target.size(); ++i) {
        auto& dst = target[i].data;
        const auto& src = online[i].data;
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = b * src[j] + keep * dst[j];
    }
}

}  // namespace afrl::dqn
