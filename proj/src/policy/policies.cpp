#include "afrl/policy/policies.hpp"

#include <array>
#include <string>

#include "afrl/error.hpp"

namespace afrl::policy {

namespace {

struct NamedKind {
    std::string_view name;
    PolicyKind kind;
};

constexpr std::array<NamedKind, 6> kPolicyNames{{
    {"fixed", PolicyKind::Fixed},
    {"hc-mgm", PolicyKind::HillClimberMgm},
    {"hc-mlr", PolicyKind::HillClimberMlr},
    {"rl-mgm", PolicyKind::LearnedMgm},
    {"rl-mlr", PolicyKind::LearnedMlr},
    {"rl-cnn", PolicyKind::LearnedCnn},
}};

std::string valid_names() {
    std::string out;
    for (const auto& n : kPolicyNames) {
        if (!out.empty()) out += ", ";
        out += n.name;
    }
    return out;
}

}  // namespace

PolicyKind parse_policy_kind(std::string_view name) {
    for (const auto& n : kPolicyNames) {
        if (n.name == name) return n.kind;
    }
    throw ConfigError("unknown policy '" + std::string(name) + "'; valid policies: " + valid_names());
}

std::string_view policy_name(PolicyKind kind) noexcept {
    for (const auto& n : kPolicyNames) {
        if (n.kind == kind) return n.name;
    }
    return "unknown";
}

bool is_learned(PolicyKind kind) noexcept {
    return kind == PolicyKind::LearnedMgm || kind == PolicyKind::LearnedMlr || kind == PolicyKind::LearnedCnn;
}

std::optional<metrics::MetricKind> policy_metric(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::HillClimberMgm:
        case PolicyKind::LearnedMgm:
            return metrics::MetricKind::mgm();
        case PolicyKind::HillClimberMlr:
        case PolicyKind::LearnedMlr:
            return metrics::MetricKind::mlr();
        default:
            return std::nullopt;
    }
}

std::pair<double, HillClimberState> hill_climber_step(const HillClimberState& state, double phi_t, double h) {
    const bool improving = state.f_t > 0.0 && state.f_t < 1.0 && phi_t > state.phi_prev;
    const double proposed = improving ? state.f_t + state.d_prev * h : state.f_t - state.d_prev * h;
    const double next = clamp_focal(proposed);

    HillClimberState out;
    out.f_prev = state.f_t;
    out.f_t = next;
    out.phi_prev = phi_t;
    if (next > state.f_t) {
        out.d_prev = +1;
    } else if (next < state.f_t) {
        out.d_prev = -1;
    } else {
        out.d_prev = -state.d_prev;
    }
    return {next, out};
}

int greedy_action(std::span<const float> q) {
    if (q.size() != kActions.size()) throw ShapeError("expected 3 Q-values");
    // Preference order on ties: stay, then -h, then +h.
    constexpr std::array<int, 3> order{1, 0, 2};
    int best = order[0];
    for (int a : order) {
        if (q[static_cast<std::size_t>(a)] > q[static_cast<std::size_t>(best)]) best = a;
    }
    return best;
}

double apply_action(double f, int action) {
    if (action < 0 || action >= static_cast<int>(kActions.size())) throw IndexError("action index out of range");
    return clamp_focal(f + kActions[static_cast<std::size_t>(action)]);
}

double learned_policy_step(const neural::QNetwork& qnet, std::span<const float> state, double f_t) {
    const auto q = qnet.forward(state);
    return apply_action(f_t, greedy_action(q));
}

std::vector<float> patch_to_floats(const image::GrayImage& patch) {
    std::vector<float> out(patch.size());
    const auto px = patch.pixels();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(px[i]);
    return out;
}

// ---------------------------------------------------------------------------

PolicyNetworks PolicyNetworks::initialized(PolicyKind kind, std::uint64_t seed, double mlr_sigma) {
    if (!is_learned(kind)) throw ConfigError(std::string(policy_name(kind)) + " has no networks");
    PolicyNetworks nets;
    nets.kind = kind;
    if (kind == PolicyKind::LearnedCnn) {
        nets.encoder = neural::Encoder::initialized(seed ^ 0x9E3779B97F4A7C15ull);
        nets.qnet = neural::QNetwork::initialized(state_width(kEncodingWidth), seed);
    } else {
        nets.metric = *policy_metric(kind);
        nets.metric.mlr_sigma = mlr_sigma;
        nets.qnet = neural::QNetwork::initialized(state_width(1), seed);
    }
    return nets;
}

neural::Checkpoint PolicyNetworks::to_checkpoint(const nlohmann::json& extra) const {
    neural::Checkpoint ckpt;
    ckpt.params.append(qnet.params(), "q.");
    if (encoder) ckpt.params.append(encoder->params(), "enc.");
    ckpt.metadata = extra.is_object() ? extra : nlohmann::json::object();
    ckpt.metadata["variant"] = std::string(policy_name(kind));
    ckpt.metadata["metric"] = kind == PolicyKind::LearnedCnn ? "cnn" : std::string(metric.name());
    ckpt.metadata["mlr_sigma"] = metric.mlr_sigma;
    ckpt.metadata["normalizer_scale"] = normalizer.scale;
    ckpt.metadata["state_width"] = qnet.input_width();
    ckpt.metadata["history_length"] = kHistoryLength;
    return ckpt;
}

PolicyNetworks PolicyNetworks::from_checkpoint(const neural::Checkpoint& ckpt, PolicyKind expected) {
    const std::string variant = ckpt.metadata.value("variant", std::string());
    if (variant != policy_name(expected)) {
        throw ArchitectureMismatchError("checkpoint holds a '" + variant + "' policy but '" +
                                        std::string(policy_name(expected)) + "' was requested");
    }
    PolicyNetworks nets;
    nets.kind = expected;
    try {
        const bool e2e = expected == PolicyKind::LearnedCnn;
        const int width = state_width(e2e ? kEncodingWidth : 1);
        neural::QNetwork q(ckpt.params.extract("q."));
        if (q.input_width() != width || q.hidden_width() != neural::QNetwork::kHidden) {
            throw ArchitectureMismatchError("Q-network input width " + std::to_string(q.input_width()) +
                                            " does not match " + variant);
        }
        nets.qnet = std::move(q);
        const auto enc_params = ckpt.params.extract("enc.");
        if (e2e) {
            neural::Encoder enc(enc_params);
            if (enc.output_width() != kEncodingWidth || enc.depth() != neural::Encoder::kDepth) {
                throw ArchitectureMismatchError("encoder layout does not match rl-cnn");
            }
            nets.encoder = std::move(enc);
        } else if (enc_params.size() != 0) {
            throw ArchitectureMismatchError("scalar-metric checkpoint unexpectedly contains an encoder");
        }
        if (ckpt.params.size() != nets.qnet.params().size() + enc_params.size()) {
            throw ArchitectureMismatchError("checkpoint contains tensors outside the policy networks");
        }
        if (!e2e) {
            nets.metric = *policy_metric(expected);
            nets.metric.mlr_sigma = ckpt.metadata.value("mlr_sigma", metrics::kDefaultMlrSigma);
        }
        nets.normalizer.scale = ckpt.metadata.value("normalizer_scale", 1.0);
        nets.normalizer.validate();
    } catch (const ShapeError& e) {
        throw ArchitectureMismatchError(std::string("checkpoint tensors do not match ") + variant + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ArchitectureMismatchError(std::string("bad checkpoint metadata: ") + e.what());
    }
    return nets;
}

// ---------------------------------------------------------------------------

FixedPolicy::FixedPolicy(double f0) : f0_(f0) {
    if (!(f0 >= 0.0 && f0 <= 1.0)) throw DomainError("fixed focal power must lie in [0,1]");
}

std::string FixedPolicy::descriptor() const { return "fixed@" + std::to_string(f0_); }

HillClimberPolicy::HillClimberPolicy(metrics::MetricKind metric, double h) : metric_(metric), h_(h) {
    metric_.validate();
}

void HillClimberPolicy::reset(double initial_f) { state_ = HillClimberState::start(initial_f); }

double HillClimberPolicy::step(const image::GrayImage& patch) {
    auto [next, state] = hill_climber_step(state_, metrics::evaluate_metric(metric_, patch), h_);
    state_ = state;
    return next;
}

std::string HillClimberPolicy::descriptor() const { return "hc-" + std::string(metric_.name()); }

LearnedMetricPolicy::LearnedMetricPolicy(PolicyNetworks nets) : nets_(std::move(nets)), history_(1) {
    if (nets_.kind == PolicyKind::LearnedCnn || nets_.qnet.input_width() != state_width(1)) {
        throw ConfigError("scalar-metric policy needs a 16-wide Q-network");
    }
    nets_.normalizer.validate();
}

void LearnedMetricPolicy::reset(double initial_f) {
    f_ = initial_f;
    history_.reset(initial_f);
}

double LearnedMetricPolicy::step(const image::GrayImage& patch) {
    const float phi = static_cast<float>(metrics::evaluate_metric(nets_.metric, patch));
    history_.push(std::span<const float>(&phi, 1), f_);
    f_ = learned_policy_step(nets_.qnet, assemble_state(history_, nets_.normalizer), f_);
    return f_;
}

std::string LearnedMetricPolicy::descriptor() const { return std::string(policy_name(nets_.kind)); }

EndToEndPolicy::EndToEndPolicy(PolicyNetworks nets) : nets_(std::move(nets)), history_(kEncodingWidth) {
    if (!nets_.encoder || nets_.qnet.input_width() != state_width(kEncodingWidth)) {
        throw ConfigError("end-to-end policy needs an encoder and a 72-wide Q-network");
    }
}

void EndToEndPolicy::reset(double initial_f) {
    f_ = initial_f;
    history_.reset(initial_f);
}

double EndToEndPolicy::step(const image::GrayImage& patch) {
    const std::vector<float> pixels = patch_to_floats(patch);
    const std::vector<float> encoding = nets_.encoder->encode(pixels);
    ++encoder_calls_;
    history_.push(encoding, f_);
    f_ = learned_policy_step(nets_.qnet, assemble_state(history_, nets_.normalizer), f_);
    return f_;
}

std::string EndToEndPolicy::descriptor() const { return "rl-cnn"; }

std::unique_ptr<FocusPolicy> make_policy(PolicyKind kind, const PolicyNetworks* nets, double fixed_f0,
                                         double mlr_sigma) {
    switch (kind) {
        case PolicyKind::Fixed:
            return std::make_unique<FixedPolicy>(fixed_f0);
        case PolicyKind::HillClimberMgm:
            return std::make_unique<HillClimberPolicy>(metrics::MetricKind::mgm());
        case PolicyKind::HillClimberMlr:
            return std::make_unique<HillClimberPolicy>(metrics::MetricKind::mlr(mlr_sigma));
        default:
            break;
    }
    if (nets == nullptr) {
        throw ConfigError("policy " + std::string(policy_name(kind)) + " requires trained networks");
    }
    if (nets->kind != kind) {
        throw ConfigError("networks were trained for " + std::string(policy_name(nets->kind)) + ", not " +
                          std::string(policy_name(kind)));
    }
    if (kind == PolicyKind::LearnedCnn) return std::make_unique<EndToEndPolicy>(*nets);
    return std::make_unique<LearnedMetricPolicy>(*nets);
}

}  // namespace afrl::policy
