#pragma once

#include <span>
#include <vector>

#include "afrl/neural/params.hpp"

namespace afrl::neural {

/// Smoothed L1 (Huber, threshold 1): mean of 0.5 d^2 for |d| < 1, |d| - 0.5 otherwise.
/// Throws ShapeError when the widths differ.
double huber_loss(std::span<const double> pred, std::span<const double> target);

/// Derivative of the Huber term with respect to d, not divided by the element count.
double huber_grad(double d);

/// RMSProp without a momentum buffer:
///   acc <- decay * acc + (1 - decay) * g^2
///   theta <- theta - lr * g / (sqrt(acc) + eps)
struct RmsProp {
    double learning_rate = 1e-5;
    double decay = 0.95;
    double epsilon = 1e-8;
    ParamSet accumulator;

    RmsProp() = default;
    /// Zero accumulator aligned with `params`.
    explicit RmsProp(const ParamSet& params, double lr = 1e-5, double decay = 0.95, double eps = 1e-8);

    /// Throws ShapeError when params, grads and accumulator are not aligned.
    void step(ParamSet& params, const ParamSet& grads);
};

}  // namespace afrl::neural
