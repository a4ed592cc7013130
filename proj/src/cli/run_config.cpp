#include "afrl/cli/run_config.hpp"

#include <fstream>
#include <functional>
#include <map>

#include "afrl/error.hpp"
#include "afrl/policy/policies.hpp"

namespace afrl::cli {

namespace {

using nlohmann::json;
using Setter = std::function<void(RunConfig&, const json&)>;
using Getter = std::function<json(const RunConfig&)>;

struct Field {
    Setter set;
    Getter get;
};

template <typename T>
T as(const json& v, const std::string& key) {
    try {
        if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) throw ConfigError("");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError("");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError("");
        }
        return v.get<T>();
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type: " + v.dump());
    }
}

#define AFRL_FIELD(name, type, member)                                                     \
    {                                                                                      \
        name, Field {                                                                      \
            [](RunConfig& c, const json& v) { c.member = as<type>(v, name); },             \
                [](const RunConfig& c) { return json(c.member); }                          \
        }                                                                                  \
    }

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table{
        AFRL_FIELD("seed", std::uint64_t, seed),
        AFRL_FIELD("workers", int, workers),
        AFRL_FIELD("policy", std::string, policy),
        AFRL_FIELD("compare", std::string, compare),
        AFRL_FIELD("count", int, count),
        AFRL_FIELD("frames", int, simulation.frames),
        AFRL_FIELD("crop_size", int, simulation.crop_size),
        AFRL_FIELD("sigma0_min", double, simulation.sigma0_min),
        AFRL_FIELD("sigma0_max", double, simulation.sigma0_max),
        AFRL_FIELD("crop_velocity_decay", double, simulation.walk.crop_velocity_decay),
        AFRL_FIELD("crop_noise_std", double, simulation.walk.crop_noise_std),
        AFRL_FIELD("crop_max_speed", double, simulation.walk.crop_max_speed),
        AFRL_FIELD("focus_velocity_decay", double, simulation.walk.focus_velocity_decay),
        AFRL_FIELD("focus_noise_std", double, simulation.walk.focus_noise_std),
        AFRL_FIELD("focus_max_speed", double, simulation.walk.focus_max_speed),
        AFRL_FIELD("initial_f", double, initial_f),
        AFRL_FIELD("fixed_f", double, fixed_f),
        AFRL_FIELD("mlr_sigma", double, mlr_sigma),
        AFRL_FIELD("smoothing_window", int, smoothing_window),
        AFRL_FIELD("bootstrap_iterations", int, bootstrap_iterations),
        AFRL_FIELD("gamma", double, train.gamma),
        AFRL_FIELD("ema_beta", double, train.ema_beta),
        AFRL_FIELD("epsilon_start", double, train.epsilon_start),
        AFRL_FIELD("epsilon_end", double, train.epsilon_end),
        AFRL_FIELD("epsilon_decay_span", long, train.epsilon_decay_span),
        AFRL_FIELD("replay_capacity", long, train.replay_capacity),
        AFRL_FIELD("batch_size", int, train.batch_size),
        AFRL_FIELD("learn_every", int, train.learn_every),
        AFRL_FIELD("total_experiences", long, train.total_experiences),
        AFRL_FIELD("learning_rate", double, train.learning_rate),
        AFRL_FIELD("rmsprop_decay", double, train.rmsprop_decay),
        AFRL_FIELD("rmsprop_epsilon", double, train.rmsprop_epsilon),
        AFRL_FIELD("validate_every", int, train.validate_every),
        {"warmup", Field{[](RunConfig& c, const json& v) { c.warmup = as<int>(v, "warmup"); },
                         [](const RunConfig& c) { return c.warmup ? json(*c.warmup) : json(); }}},
    };
    return table;
}

#undef AFRL_FIELD

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid config: " + what);
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [k, _] : fields()) out.push_back(k);
        return out;
    }();
    return names;
}

void RunConfig::apply(const std::string& key, const nlohmann::json& value) {
    const auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError("unknown config key '" + key + "'");
    it->second.set(*this, value);
}

void RunConfig::apply(const nlohmann::json& object) {
    if (!object.is_object()) throw ConfigError("config must be a flat JSON object");
    for (const auto& [k, v] : object.items()) apply(k, v);
}

void RunConfig::apply_assignment(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    apply(key, value);
}

void RunConfig::validate() const {
    require(workers >= 1, "workers must be at least 1");
    policy::parse_policy_kind(policy);
    if (!compare.empty()) policy::parse_policy_kind(compare);
    require(count >= 1, "count must be at least 1");
    simulation.validate();
    require(initial_f >= 0.0 && initial_f <= 1.0, "initial_f must lie in [0,1]");
    require(fixed_f >= 0.0 && fixed_f <= 1.0, "fixed_f must lie in [0,1]");
    require(mlr_sigma > 0.0, "mlr_sigma must be positive");
    require(smoothing_window >= 1, "smoothing_window must be at least 1");
    require(bootstrap_iterations >= 1, "bootstrap_iterations must be at least 1");
    train_config().validate();
}

dqn::TrainConfig RunConfig::train_config() const {
    dqn::TrainConfig t = train;
    t.seed = seed;
    t.workers = workers;
    t.mlr_sigma = mlr_sigma;
    t.warmup = warmup ? *warmup : 10 * train.batch_size;
    return t;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, f] : fields()) j[k] = f.get(*this);
    return j;
}

void RunConfig::apply_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    const nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file " + path.string() + " is not valid JSON");
    apply(j);
}

}  // namespace afrl::cli
