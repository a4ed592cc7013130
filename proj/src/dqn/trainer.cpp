#include "afrl/dqn/trainer.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <unordered_map>

#include "afrl/dqn/replay.hpp"
#include "afrl/error.hpp"
#include "afrl/metrics/focus_metrics.hpp"
#include "afrl/neural/checkpoint.hpp"
#include "afrl/neural/optim.hpp"

namespace afrl::dqn {

namespace {

using neural::RowMatrix;
using policy::kHistoryLength;

constexpr int kPatchPixels = scan::kPatchSize * scan::kPatchSize;
constexpr int kScalarWidth = policy::state_width(1);
constexpr int kEncodedWidth = policy::state_width(policy::kEncodingWidth);

struct ScalarTransition {
    std::array<float, kScalarWidth> state;
    std::array<float, kScalarWidth> next;
    float reward;
    std::uint8_t action;
};

/// ids[0] and focal[0] are the newest entry of the next state; entries 1..8
/// are the current state from newest to oldest. The next state is entries 0..7.
struct PatchTransition {
    std::array<std::int64_t, kHistoryLength + 1> ids;
    std::array<float, kHistoryLength + 1> focal;
    float reward;
    std::uint8_t action;
};

using Store = PatchStore<kPatchPixels>;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void check_scans(std::span<const bench::LabeledScan> scans, const char* what) {
    if (scans.empty()) throw ConfigError(std::string("no ") + what + " scans");
    for (const auto& s : scans) {
        if (scan::frame_count(s.scan) == 0 || !scan::optimal_focus(s.scan, 0)) {
            throw ConfigError(std::string(what) + " scan '" + s.id + "' has no ground-truth focus");
        }
    }
}

class Trainer {
public:
    Trainer(std::span<const bench::LabeledScan> train_scans, std::span<const bench::LabeledScan> val_scans,
            policy::PolicyKind variant, const TrainConfig& cfg, std::filesystem::path out_dir,
            const policy::PolicyNetworks* resume, long resume_experiences)
        : train_(train_scans),
          val_(val_scans),
          variant_(variant),
          cfg_(cfg),
          out_dir_(std::move(out_dir)),
          rng_(cfg.seed),
          e2e_(variant == policy::PolicyKind::LearnedCnn),
          history_(e2e_ ? policy::kEncodingWidth : 1),
          scalar_replay_(e2e_ ? 1 : static_cast<std::size_t>(cfg.replay_capacity)),
          patch_replay_(e2e_ ? static_cast<std::size_t>(cfg.replay_capacity) : 1),
          schedule_offset_(resume_experiences) {
        if (resume != nullptr) {
            if (resume->kind != variant) {
                throw ArchitectureMismatchError("resume checkpoint holds a '" +
                                                std::string(policy::policy_name(resume->kind)) + "' policy, not '" +
                                                std::string(policy::policy_name(variant)) + "'");
            }
            online_ = *resume;
        } else {
            online_ = policy::PolicyNetworks::initialized(variant, cfg.seed, cfg.mlr_sigma);
            if (!e2e_) online_.normalizer = fit_metric_normalizer(train_, online_.metric);
        }
        target_ = online_;
        rms_q_ = neural::RmsProp(online_.qnet.params(), cfg.learning_rate, cfg.rmsprop_decay, cfg.rmsprop_epsilon);
        if (e2e_) {
            rms_enc_ =
                neural::RmsProp(online_.encoder->params(), cfg.learning_rate, cfg.rmsprop_decay, cfg.rmsprop_epsilon);
        }
        result_.best = online_;
    }

    TrainResult run() {
        start_ = std::chrono::steady_clock::now();
        if (!out_dir_.empty()) {
            std::filesystem::create_directories(out_dir_);
            write_train_log({}, out_dir_ / "train_log.csv");
        }
        std::uniform_int_distribution<std::size_t> pick_scan(0, train_.size() - 1);
        std::uniform_real_distribution<double> pick_f(0.0, 1.0);
        while (experiences_ < cfg_.total_experiences) {
            const auto& s = train_[pick_scan(rng_)];
            const double f0 = pick_f(rng_);
            run_episode(s, f0);
            ++episodes_;
            const bool finished = experiences_ >= cfg_.total_experiences;
            std::optional<double> val;
            if (episodes_ % cfg_.validate_every == 0 || finished) val = validate();
            log_episode(val);
        }
        result_.last = online_;
        result_.experiences = experiences_;
        result_.episodes = episodes_;
        if (!out_dir_.empty()) {
            neural::save_checkpoint(to_checkpoint(result_.best, result_.best_val_mae), out_dir_ / "best.ckpt");
            neural::save_checkpoint(to_checkpoint(online_, last_val_), out_dir_ / "last.ckpt");
        }
        return std::move(result_);
    }

private:
    // ---- acting -----------------------------------------------------------

    /// Pushes the observation of `patch` (seen at power f) into the histories.
    void observe(const image::GrayImage& patch, double f) {
        if (e2e_) {
            Store::Patch px;
            const auto src = patch.pixels();
            for (int i = 0; i < kPatchPixels; ++i) px[static_cast<std::size_t>(i)] = static_cast<float>(src[static_cast<std::size_t>(i)]);
            const std::int64_t id = store_.push(px);
            const auto enc = online_.encoder->encode(px);
            history_.push(enc, f);
            std::copy_backward(ids_.begin(), ids_.end() - 1, ids_.end());
            std::copy_backward(focal_.begin(), focal_.end() - 1, focal_.end());
            ids_[0] = id;
            focal_[0] = static_cast<float>(f);
        } else {
            const float phi = static_cast<float>(metrics::evaluate_metric(online_.metric, patch));
            history_.push(std::span<const float>(&phi, 1), f);
        }
    }

    void run_episode(const bench::LabeledScan& s, double f0) {
        const int frames = scan::frame_count(s.scan);
        history_.reset(f0);
        ids_.fill(kNoPatch);
        focal_.fill(static_cast<float>(f0));
        double f = f0;
        double episode_return = 0.0;
        int steps = 0;
        episode_loss_sum_ = 0.0;
        episode_learn_steps_ = 0;

        bool pending = false;
        std::vector<float> prev_state;
        std::array<std::int64_t, kHistoryLength> prev_ids{};
        std::array<float, kHistoryLength> prev_focal{};
        int prev_action = 1;
        double prev_reward = 0.0;

        auto finalize = [&](const std::vector<float>& next_state) {
            if (e2e_) {
                PatchTransition tr;
                tr.ids[0] = ids_[0];
                tr.focal[0] = focal_[0];
                std::copy(prev_ids.begin(), prev_ids.end(), tr.ids.begin() + 1);
                std::copy(prev_focal.begin(), prev_focal.end(), tr.focal.begin() + 1);
                tr.reward = static_cast<float>(prev_reward);
                tr.action = static_cast<std::uint8_t>(prev_action);
                patch_replay_.push(tr);
                release_patches();
            } else {
                ScalarTransition tr;
                std::copy(prev_state.begin(), prev_state.end(), tr.state.begin());
                std::copy(next_state.begin(), next_state.end(), tr.next.begin());
                tr.reward = static_cast<float>(prev_reward);
                tr.action = static_cast<std::uint8_t>(prev_action);
                scalar_replay_.push(tr);
            }
            maybe_learn();
        };

        int t = 0;
        for (; t < frames && experiences_ < cfg_.total_experiences; ++t) {
            observe(scan::env_patch(s.scan, t, f), f);
            std::vector<float> state = policy::assemble_state(history_, online_.normalizer);
            if (pending) finalize(state);

            const auto q = online_.qnet.forward(state);
            const double eps = epsilon(schedule_offset_ + experiences_, cfg_);
            const int action = select_action(q, eps, rng_);
            const double f_next = policy::apply_action(f, action);
            const double reward = -std::abs(*scan::optimal_focus(s.scan, t) - f_next);
            ++experiences_;
            ++steps;
            episode_return += reward;

            pending = true;
            prev_state = std::move(state);
            std::copy(ids_.begin(), ids_.end(), prev_ids.begin());
            std::copy(focal_.begin(), focal_.end(), prev_focal.begin());
            prev_action = action;
            prev_reward = reward;
            f = f_next;
        }
        if (pending) {
            // The successor of the last action re-renders the frame after it,
            // or the final frame again at the new power when the scan ends.
            observe(scan::env_patch(s.scan, std::min(t, frames - 1), f), f);
            finalize(policy::assemble_state(history_, online_.normalizer));
        }
        episode_return_ = steps > 0 ? episode_return / steps : 0.0;
    }

    void release_patches() {
        const auto& oldest = patch_replay_.oldest();
        std::int64_t lowest = oldest.ids[0];
        for (auto id : oldest.ids) {
            if (id != kNoPatch) lowest = std::min(lowest, id);
        }
        store_.release_before(lowest);
    }

    // ---- learning ---------------------------------------------------------

    void maybe_learn() {
        const std::size_t held = e2e_ ? patch_replay_.size() : scalar_replay_.size();
        const std::uint64_t pushed = e2e_ ? patch_replay_.inserted() : scalar_replay_.inserted();
        if (held < static_cast<std::size_t>(std::max(cfg_.warmup, cfg_.batch_size))) return;
        if (pushed % static_cast<std::uint64_t>(cfg_.learn_every) != 0) return;
        const double loss = e2e_ ? learn_encoded() : learn_scalar();
        if (!std::isfinite(loss) || !online_finite()) diverged(loss);
        episode_loss_sum_ += loss;
        ++episode_learn_steps_;
    }

    double learn_scalar() {
        const auto idx = scalar_replay_.sample_indices(static_cast<std::size_t>(cfg_.batch_size), rng_);
        const auto batch = static_cast<Eigen::Index>(idx.size());
        RowMatrix<float> states(batch, kScalarWidth);
        RowMatrix<float> next(batch, kScalarWidth);
        std::vector<double> rewards(idx.size());
        std::vector<int> actions(idx.size());
        for (Eigen::Index i = 0; i < batch; ++i) {
            const auto& tr = scalar_replay_.at(idx[static_cast<std::size_t>(i)]);
            for (int c = 0; c < kScalarWidth; ++c) {
                states(i, c) = tr.state[static_cast<std::size_t>(c)];
                next(i, c) = tr.next[static_cast<std::size_t>(c)];
            }
            rewards[static_cast<std::size_t>(i)] = tr.reward;
            actions[static_cast<std::size_t>(i)] = tr.action;
        }
        const auto y = td_targets(rewards, target_.qnet, next, cfg_.gamma);
        neural::MlpTape<float> tape;
        const auto q = online_.qnet.forward_batch(states, &tape);
        RowMatrix<float> d_q;
        const double loss = taken_action_loss(q, actions, y, d_q);
        if (!std::isfinite(loss)) return loss;
        const auto grads = online_.qnet.backward(tape, d_q);
        rms_q_.step(online_.qnet.params(), grads);
        ema_update(target_.qnet.params(), online_.qnet.params(), cfg_.ema_beta);
        return loss;
    }

    /// Distinct patch ids (first-occurrence order) and the row each maps to.
    struct PatchBatch {
        std::vector<std::int64_t> ids;
        std::unordered_map<std::int64_t, Eigen::Index> row;
        RowMatrix<float> pixels;
    };

    PatchBatch gather(const std::vector<const PatchTransition*>& batch, int first) const {
        PatchBatch pb;
        for (const auto* tr : batch) {
            for (int k = 0; k < kHistoryLength; ++k) {
                const auto id = tr->ids[static_cast<std::size_t>(first + k)];
                if (id == kNoPatch || pb.row.contains(id)) continue;
                pb.row.emplace(id, static_cast<Eigen::Index>(pb.ids.size()));
                pb.ids.push_back(id);
            }
        }
        pb.pixels.resize(static_cast<Eigen::Index>(pb.ids.size()), kPatchPixels);
        for (std::size_t r = 0; r < pb.ids.size(); ++r) {
            const auto& px = store_.at(pb.ids[r]);
            std::copy(px.begin(), px.end(), pb.pixels.row(static_cast<Eigen::Index>(r)).data());
        }
        return pb;
    }

    RowMatrix<float> assemble(const std::vector<const PatchTransition*>& batch, int first, const PatchBatch& pb,
                              const RowMatrix<float>& enc) const {
        const int w = policy::kEncodingWidth;
        RowMatrix<float> s = RowMatrix<float>::Zero(static_cast<Eigen::Index>(batch.size()), kEncodedWidth);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            for (int k = 0; k < kHistoryLength; ++k) {
                const auto slot = static_cast<std::size_t>(first + k);
                const auto id = batch[i]->ids[slot];
                if (id != kNoPatch) s.block(r, k * w, 1, w) = enc.row(pb.row.at(id));
                s(r, kHistoryLength * w + k) = batch[i]->focal[slot];
            }
        }
        return s;
    }

    double learn_encoded() {
        const auto idx = patch_replay_.sample_indices(static_cast<std::size_t>(cfg_.batch_size), rng_);
        std::vector<const PatchTransition*> batch;
        std::vector<double> rewards;
        std::vector<int> actions;
        for (auto i : idx) {
            batch.push_back(&patch_replay_.at(i));
            rewards.push_back(batch.back()->reward);
            actions.push_back(batch.back()->action);
        }

        const PatchBatch next_pb = gather(batch, 0);
        const auto next_enc = target_.encoder->forward_batch(next_pb.pixels);
        const auto y = td_targets(rewards, target_.qnet, assemble(batch, 0, next_pb, next_enc), cfg_.gamma);

        const PatchBatch pb = gather(batch, 1);
        neural::EncoderTape<float> enc_tape;
        const auto enc = online_.encoder->forward_batch(pb.pixels, &enc_tape);
        const auto states = assemble(batch, 1, pb, enc);
        neural::MlpTape<float> tape;
        const auto q = online_.qnet.forward_batch(states, &tape);
        RowMatrix<float> d_q;
        const double loss = taken_action_loss(q, actions, y, d_q);
        if (!std::isfinite(loss)) return loss;

        RowMatrix<float> d_states;
        const auto q_grads = online_.qnet.backward(tape, d_q, &d_states);
        const int w = policy::kEncodingWidth;
        RowMatrix<float> d_enc = RowMatrix<float>::Zero(enc.rows(), w);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            for (int k = 0; k < kHistoryLength; ++k) {
                const auto id = batch[i]->ids[static_cast<std::size_t>(1 + k)];
                if (id == kNoPatch) continue;
                d_enc.row(pb.row.at(id)) += d_states.block(static_cast<Eigen::Index>(i), k * w, 1, w);
            }
        }
        const auto enc_grads = online_.encoder->backward(enc_tape, d_enc);
        rms_q_.step(online_.qnet.params(), q_grads);
        rms_enc_.step(online_.encoder->params(), enc_grads);
        ema_update(target_.qnet.params(), online_.qnet.params(), cfg_.ema_beta);
        ema_update(target_.encoder->params(), online_.encoder->params(), cfg_.ema_beta);
        return loss;
    }

    [[nodiscard]] bool online_finite() const {
        return online_.qnet.params().all_finite() && (!online_.encoder || online_.encoder->params().all_finite());
    }

    [[noreturn]] void diverged(double loss) {
        std::ostringstream msg;
        msg << "training diverged (loss " << loss << ") at episode " << episodes_ + 1 << ", experience "
            << experiences_ << "; online parameters " << (online_.qnet.params().all_finite() ? "finite" : "non-finite")
            << ", epsilon " << epsilon(schedule_offset_ + experiences_, cfg_);
        if (!out_dir_.empty()) {
            nlohmann::json dump{{"loss", fmt(loss)},
                                {"episode", episodes_ + 1},
                                {"experiences", experiences_},
                                {"epsilon", epsilon(schedule_offset_ + experiences_, cfg_)},
                                {"q_params_finite", online_.qnet.params().all_finite()},
                                {"config", config_to_json(cfg_)}};
            std::ofstream(out_dir_ / "diverged.json") << dump.dump(2) << '\n';
            neural::save_checkpoint(to_checkpoint(online_, std::nullopt), out_dir_ / "diverged.ckpt");
            msg << "; state written to " << (out_dir_ / "diverged.json").string();
        }
        throw NumericalError(msg.str());
    }

    // ---- bookkeeping ------------------------------------------------------

    double validate() {
        const auto snapshot = std::make_shared<const policy::PolicyNetworks>(online_);
        const auto kind = variant_;
        const bench::PolicyFactory factory = [snapshot, kind] { return policy::make_policy(kind, snapshot.get()); };
        const auto report = bench::evaluate_policy(factory, val_, 0.5, cfg_.workers);
        const double mae = report.aggregate.mae;
        last_val_ = mae;
        if (!result_.best_val_mae || mae < *result_.best_val_mae) {
            result_.best_val_mae = mae;
            result_.best = online_;
            if (!out_dir_.empty()) {
                neural::save_checkpoint(to_checkpoint(online_, mae), out_dir_ / "best.ckpt");
            }
        }
        return mae;
    }

    void log_episode(std::optional<double> val) {
        TrainLogRow row;
        row.episode = episodes_;
        row.experiences = experiences_;
        row.epsilon = epsilon(schedule_offset_ + experiences_, cfg_);
        if (episode_learn_steps_ > 0) row.mean_loss = episode_loss_sum_ / episode_learn_steps_;
        row.mean_return = episode_return_;
        row.val_mae = val;
        row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        result_.log.push_back(row);
        if (!out_dir_.empty()) {
            std::ofstream out(out_dir_ / "train_log.csv", std::ios::app);
            out << row.episode << ',' << row.experiences << ',' << fmt(row.epsilon) << ','
                << (row.mean_loss ? fmt(*row.mean_loss) : "") << ',' << fmt(row.mean_return) << ','
                << (row.val_mae ? fmt(*row.val_mae) : "") << ',' << fmt(row.wall_seconds) << '\n';
        }
    }

    neural::Checkpoint to_checkpoint(const policy::PolicyNetworks& nets, std::optional<double> val) const {
        nlohmann::json meta{{"experiences", schedule_offset_ + experiences_},
                            {"episodes", episodes_},
                            {"seed", cfg_.seed},
                            {"train_config", config_to_json(cfg_)}};
        meta["val_mae"] = val ? nlohmann::json(*val) : nlohmann::json();
        return nets.to_checkpoint(meta);
    }

    std::span<const bench::LabeledScan> train_;
    std::span<const bench::LabeledScan> val_;
    policy::PolicyKind variant_;
    TrainConfig cfg_;
    std::filesystem::path out_dir_;
    scan::Rng rng_;
    bool e2e_;

    policy::PolicyNetworks online_;
    policy::PolicyNetworks target_;
    neural::RmsProp rms_q_;
    neural::RmsProp rms_enc_;

    policy::PolicyHistory history_;
    std::array<std::int64_t, kHistoryLength> ids_{};
    std::array<float, kHistoryLength> focal_{};
    Store store_;
    ReplayMemory<ScalarTransition> scalar_replay_;
    ReplayMemory<PatchTransition> patch_replay_;

    long schedule_offset_ = 0;
    long experiences_ = 0;
    int episodes_ = 0;
    double episode_return_ = 0.0;
    double episode_loss_sum_ = 0.0;
    long episode_learn_steps_ = 0;
    std::optional<double> last_val_;
    TrainResult result_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

policy::MetricNormalizer fit_metric_normalizer(std::span<const bench::LabeledScan> scans,
                                               const metrics::MetricKind& metric) {
    std::vector<double> samples;
    for (const auto& s : scans) {
        const int frames = scan::frame_count(s.scan);
        for (int t = 0; t < frames; t += 25) {
            for (int k = 0; k <= 10; ++k) {
                samples.push_back(metrics::evaluate_metric(metric, scan::env_patch(s.scan, t, k / 10.0)));
            }
        }
    }
    return policy::fit_normalizer(std::move(samples));
}

nlohmann::json config_to_json(const TrainConfig& cfg) {
    return {{"gamma", cfg.gamma},
            {"ema_beta", cfg.ema_beta},
            {"epsilon_start", cfg.epsilon_start},
            {"epsilon_end", cfg.epsilon_end},
            {"epsilon_decay_span", cfg.epsilon_decay_span},
            {"replay_capacity", cfg.replay_capacity},
            {"batch_size", cfg.batch_size},
            {"warmup", cfg.warmup},
            {"learn_every", cfg.learn_every},
            {"total_experiences", cfg.total_experiences},
            {"learning_rate", cfg.learning_rate},
            {"rmsprop_decay", cfg.rmsprop_decay},
            {"rmsprop_epsilon", cfg.rmsprop_epsilon},
            {"validate_every", cfg.validate_every},
            {"seed", cfg.seed},
            {"mlr_sigma", cfg.mlr_sigma}};
}

TrainResult train(std::span<const bench::LabeledScan> train_scans, std::span<const bench::LabeledScan> val_scans,
                  policy::PolicyKind variant, const TrainConfig& cfg, const std::filesystem::path& out_dir,
                  const policy::PolicyNetworks* resume, long resume_experiences) {
    cfg.validate();
    if (!policy::is_learned(variant)) {
        throw ConfigError(std::string(policy::policy_name(variant)) + " is not a trainable policy");
    }
    check_scans(train_scans, "training");
    check_scans(val_scans, "validation");
    Trainer trainer(train_scans, val_scans, variant, cfg, out_dir, resume, resume_experiences);
    return trainer.run();
}

void write_train_log(std::span<const TrainLogRow> rows, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    out << "episode,experiences,epsilon,mean_loss,mean_return,val_mae,wall_seconds\n";
    for (const auto& row : rows) {
        out << row.episode << ',' << row.experiences << ',' << fmt(row.epsilon) << ','
            << (row.mean_loss ? fmt(*row.mean_loss) : "") << ',' << fmt(row.mean_return) << ','
            << (row.val_mae ? fmt(*row.val_mae) : "") << ',' << fmt(row.wall_seconds) << '\n';
    }
    if (!out) throw FormatError("cannot write " + path.string());
}

}  // namespace afrl::dqn
