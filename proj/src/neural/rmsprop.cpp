#include <cmath>

#include "afrl/error.hpp"
#include "afrl/neural/optim.hpp"

namespace afrl::neural {

RmsProp::RmsProp(const ParamSet& params, double lr, double decay_rate, double eps)
    : learning_rate(lr), decay(decay_rate), epsilon(eps), accumulator(params.zeros_like()) {}

void RmsProp::step(ParamSet& params, const ParamSet& grads) {
    params.check_aligned(grads);
    params.check_aligned(accumulator);
    const auto lr = static_cast<float>(learning_rate);
    const auto rho = static_cast<float>(decay);
    const auto keep = static_cast<float>(1.0 - decay);
    const auto eps = static_cast<float>(epsilon);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& theta = params[i].data;
        const auto& g = grads[i].data;
        auto& acc = accumulator[i].data;
        for (std::size_t j = 0; j < theta.size(); ++j) {
            acc[j] = rho * acc[j] + keep * g[j] * g[j];
            theta[j] -= lr * g[j] / (std::sqrt(acc[j]) + eps);
        }
    }
}

}  // namespace afrl::neural
