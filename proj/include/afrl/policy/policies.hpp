#pragma once

#include <array>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "afrl/image/gray_image.hpp"
#include "afrl/metrics/focus_metrics.hpp"
#include "afrl/neural/checkpoint.hpp"
#include "afrl/neural/network.hpp"
#include "afrl/policy/history.hpp"

namespace afrl::policy {

/// Policy names: fixed | hc-mgm | hc-mlr | rl-mgm | rl-mlr | rl-cnn.
enum class PolicyKind { Fixed, HillClimberMgm, HillClimberMlr, LearnedMgm, LearnedMlr, LearnedCnn };

/// Throws ConfigError listing the valid names.
PolicyKind parse_policy_kind(std::string_view name);
std::string_view policy_name(PolicyKind kind) noexcept;
bool is_learned(PolicyKind kind) noexcept;
/// Metric consumed by hill-climber and scalar learned policies; nullopt for fixed and rl-cnn.
std::optional<metrics::MetricKind> policy_metric(PolicyKind kind);

inline double clamp_focal(double f) { return f < 0.0 ? 0.0 : (f > 1.0 ? 1.0 : f); }

// ---------------------------------------------------------------------------
// Hill climber

struct HillClimberState {
    double f_t = 0.5;
    double f_prev = 0.5;
    /// -inf before the first observation, so the first move continues along d_prev.
    double phi_prev = -std::numeric_limits<double>::infinity();
    int d_prev = +1;

    static HillClimberState start(double f0) { return {f0, f0, -std::numeric_limits<double>::infinity(), +1}; }
};

/// One climber update:
///   f' = f + d_prev * h   if 0 < f < 1 and phi_t > phi_prev
///   f' = f - d_prev * h   otherwise
/// clamped to [0,1]. d_prev becomes the sign of the executed move, and flips
/// when clamping leaves the power unchanged.
std::pair<double, HillClimberState> hill_climber_step(const HillClimberState& state, double phi_t,
                                                      double h = kFocalStep);

// ---------------------------------------------------------------------------
// Learned policy helpers

/// Greedy action with ties resolved toward "stay" (index 1), then -h (index 0).
int greedy_action(std::span<const float> q);

/// f + kActions[action], clamped to [0,1].
double apply_action(double f, int action);

/// Runs the Q-network on `state` and applies its greedy action to f_t.
/// Throws ShapeError when the state width does not match the network.
double learned_policy_step(const neural::QNetwork& qnet, std::span<const float> state, double f_t);

std::vector<float> patch_to_floats(const image::GrayImage& patch);

// ---------------------------------------------------------------------------
// Networks bundle and checkpoint mapping

/// Everything a learned policy needs at inference time.
struct PolicyNetworks {
    PolicyKind kind = PolicyKind::LearnedMgm;
    metrics::MetricKind metric = metrics::MetricKind::mgm();
    MetricNormalizer normalizer;
    neural::QNetwork qnet{state_width(1)};
    std::optional<neural::Encoder> encoder;

    /// Freshly initialized networks for a learned policy kind.
    static PolicyNetworks initialized(PolicyKind kind, std::uint64_t seed, double mlr_sigma = metrics::kDefaultMlrSigma);

    /// Tensors under "q." and "enc.", metadata: variant, metric, mlr_sigma,
    /// normalizer_scale, state_width, history_length plus `extra`.
    [[nodiscard]] neural::Checkpoint to_checkpoint(const nlohmann::json& extra = nlohmann::json::object()) const;

    /// Throws ArchitectureMismatchError when the checkpoint holds a different
    /// variant or tensor layout than `expected`.
    static PolicyNetworks from_checkpoint(const neural::Checkpoint& ckpt, PolicyKind expected);
};

// ---------------------------------------------------------------------------
// Policies

/// A closed-loop autofocus controller. Each call to step() receives the
/// centred patch observed at the current focal power and returns the next one.
class FocusPolicy {
public:
    virtual ~FocusPolicy() = default;
    virtual void reset(double initial_f) = 0;
    virtual double step(const image::GrayImage& patch) = 0;
    [[nodiscard]] virtual double focal_power() const = 0;
    [[nodiscard]] virtual std::string descriptor() const = 0;
};

class FixedPolicy final : public FocusPolicy {
public:
    /// Throws DomainError for f0 outside [0,1].
    explicit FixedPolicy(double f0 = 0.5);
    /// The initial power is ignored; the policy always holds f0.
    void reset(double) override {}
    double step(const image::GrayImage&) override { return f0_; }
    [[nodiscard]] double focal_power() const override { return f0_; }
    [[nodiscard]] std::string descriptor() const override;

private:
    double f0_;
};

class HillClimberPolicy final : public FocusPolicy {
public:
    explicit HillClimberPolicy(metrics::MetricKind metric, double h = kFocalStep);
    void reset(double initial_f) override;
    double step(const image::GrayImage& patch) override;
    [[nodiscard]] double focal_power() const override { return state_.f_t; }
    [[nodiscard]] std::string descriptor() const override;
    [[nodiscard]] const HillClimberState& state() const noexcept { return state_; }

private:
    metrics::MetricKind metric_;
    double h_;
    HillClimberState state_;
};

/// Scalar-metric learned policy: pushes (phi_t, f_t), assembles the 16-wide
/// state and takes the greedy Q action.
class LearnedMetricPolicy final : public FocusPolicy {
public:
    explicit LearnedMetricPolicy(PolicyNetworks nets);
    void reset(double initial_f) override;
    double step(const image::GrayImage& patch) override;
    [[nodiscard]] double focal_power() const override { return f_; }
    [[nodiscard]] std::string descriptor() const override;

private:
    PolicyNetworks nets_;
    PolicyHistory history_;
    double f_ = 0.5;
};

/// End-to-end policy: encodes only the newest patch, caches earlier encodings
/// in the history, and feeds the 72-wide state to the Q-network.
class EndToEndPolicy final : public FocusPolicy {
public:
    explicit EndToEndPolicy(PolicyNetworks nets);
    void reset(double initial_f) override;
    double step(const image::GrayImage& patch) override;
    [[nodiscard]] double focal_power() const override { return f_; }
    [[nodiscard]] std::string descriptor() const override;
    [[nodiscard]] long encoder_calls() const noexcept { return encoder_calls_; }

private:
    PolicyNetworks nets_;
    PolicyHistory history_;
    double f_ = 0.5;
    long encoder_calls_ = 0;
};

/// Builds a policy by name. Learned kinds require `nets` (ConfigError otherwise).
std::unique_ptr<FocusPolicy> make_policy(PolicyKind kind, const PolicyNetworks* nets = nullptr,
                                         double fixed_f0 = 0.5, double mlr_sigma = metrics::kDefaultMlrSigma);

}  // namespace afrl::policy
