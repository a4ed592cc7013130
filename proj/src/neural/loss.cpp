#include <cmath>
#include <string>

#include "afrl/error.hpp"
#include "afrl/neural/optim.hpp"

namespace afrl::neural {

double huber_loss(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size()) {
        throw ShapeError("huber_loss widths differ: " + std::to_string(pred.size()) + " vs " +
                         std::to_string(target.size()));
    }
    if (pred.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        sum += std::abs(d) < 1.0 ? 0.5 * d * d : std::abs(d) - 0.5;
    }
    return sum / static_cast<double>(pred.size());
}

double huber_grad(double d) {
    if (std::abs(d) < 1.0) return d;
    return d > 0.0 ? 1.0 : -1.0;
}

}  // namespace afrl::neural
