#include "afrl/dqn/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "afrl/error.hpp"
#include "afrl/neural/optim.hpp"
#include "afrl/policy/policies.hpp"

namespace afrl::dqn {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid training config: " + what);
}

}  // namespace

void TrainConfig::validate() const {
    require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0,1)");
    require(ema_beta > 0.0 && ema_beta <= 1.0, "ema_beta must lie in (0,1]");
    require(epsilon_end >= 0.0 && epsilon_start <= 1.0 && epsilon_end <= epsilon_start,
            "need 0 <= epsilon_end <= epsilon_start <= 1");
    require(epsilon_end > 0.0 || epsilon_start == 0.0, "epsilon_end must be positive for geometric decay");
    require(epsilon_decay_span > 0, "epsilon_decay_span must be positive");
    require(replay_capacity > 0, "replay_capacity must be positive");
    require(batch_size > 0, "batch_size must be positive");
    require(warmup >= 0, "warmup must be non-negative");
    require(learn_every > 0, "learn_every must be positive");
    require(total_experiences >= 0, "total_experiences must be non-negative");
    require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning_rate must be positive");
    require(rmsprop_decay > 0.0 && rmsprop_decay < 1.0, "rmsprop_decay must lie in (0,1)");
    require(rmsprop_epsilon > 0.0, "rmsprop_epsilon must be positive");
    require(validate_every > 0, "validate_every must be positive");
    require(mlr_sigma > 0.0, "mlr_sigma must be positive");
    require(workers > 0, "workers must be positive");
}

double epsilon(long experiences, const TrainConfig& cfg) {
    if (experiences <= 0) return cfg.epsilon_start;
    if (experiences >= cfg.epsilon_decay_span) return cfg.epsilon_end;
    const double frac = static_cast<double>(experiences) / static_cast<double>(cfg.epsilon_decay_span);
    return cfg.epsilon_start * std::pow(cfg.epsilon_end / cfg.epsilon_start, frac);
}

int select_action(std::span<const float> q, double eps, scan::Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < eps) {
        std::uniform_int_distribution<int> pick(0, neural::kActionCount - 1);
        return pick(rng);
    }
    return policy::greedy_action(q);
}

std::vector<double> td_targets(std::span<const double> rewards, const neural::RowMatrix<float>& next_q, double gamma) {
    if (rewards.empty()) throw PreconditionError("TD targets need a nonempty batch");
    if (static_cast<std::size_t>(next_q.rows()) != rewards.size() || next_q.cols() != neural::kActionCount) {
        throw ShapeError("next-state Q matrix does not match the batch");
    }
    std::vector<double> y(rewards.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double best = std::max({next_q(r, 0), next_q(r, 1), next_q(r, 2)});
        y[i] = rewards[i] + gamma * best;
    }
    return y;
}

std::vector<double> td_targets(std::span<const double> rewards, const neural::QNetwork& target,
                               const neural::RowMatrix<float>& next_states, double gamma) {
    return td_targets(rewards, target.forward_batch(next_states), gamma);
}

double taken_action_loss(const neural::RowMatrix<float>& q, std::span<const int> actions, std::span<const double> y,
                         neural::RowMatrix<float>& d_q) {
    const auto batch = static_cast<Eigen::Index>(actions.size());
    if (q.rows() != batch || y.size() != actions.size() || q.cols() != neural::kActionCount) {
        throw ShapeError("Q batch, actions and targets must have matching lengths");
    }
    d_q = neural::RowMatrix<float>::Zero(batch, neural::kActionCount);
    std::vector<double> pred(actions.size());
    for (Eigen::Index i = 0; i < batch; ++i) {
        const auto k = static_cast<std::size_t>(i);
        pred[k] = q(i, actions[k]);
        d_q(i, actions[k]) = static_cast<float>(neural::huber_grad(pred[k] - y[k]) / static_cast<double>(batch));
    }
    return neural::huber_loss(pred, y);
}

}  // namespace afrl::dqn
