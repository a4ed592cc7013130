#include "afrl/metrics/focus_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "afrl/error.hpp"
#include "afrl/image/filters.hpp"

namespace afrl::metrics {

double mgm(const image::GrayImage& img) {
    const auto [gx, gy] = image::sobel_gradients(img);
    const auto x = gx.pixels();
    const auto y = gy.pixels();
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += std::sqrt(x[i] * x[i] + y[i] * y[i]);
    return sum / static_cast<double>(x.size());
}

double mlr(const image::GrayImage& img, double sigma) {
    if (!(sigma > 0.0)) throw DomainError("mlr sigma must be positive, got " + std::to_string(sigma));
    const image::GrayImage smooth = image::gaussian_blur(img, sigma);
    const auto raw = img.pixels();
    const auto blurred = smooth.pixels();
    double sum = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double a = blurred[i] + 1.0;
        const double b = raw[i] + 1.0;
        sum += std::max(a / b, b / a);
    }
    return sum / static_cast<double>(raw.size());
}

void MetricKind::validate() const {
    if (!(mlr_sigma > 0.0) || !std::isfinite(mlr_sigma)) {
        throw ConfigError("mlr_sigma must be positive, got " + std::to_string(mlr_sigma));
    }
}

std::string_view MetricKind::name() const noexcept { return kind == Kind::Mgm ? "mgm" : "mlr"; }

MetricKind parse_metric_kind(std::string_view name) {
    if (name == "mgm") return MetricKind::mgm();
    if (name == "mlr") return MetricKind::mlr();
    throw ConfigError("unknown focal metric '" + std::string(name) + "' (expected mgm or mlr)");
}

double evaluate_metric(const MetricKind& kind, const image::GrayImage& patch) {
    switch (kind.kind) {
        case MetricKind::Kind::Mgm:
            return mgm(patch);
        case MetricKind::Kind::Mlr:
            return mlr(patch, kind.mlr_sigma);
    }
    return 0.0;
}

}  // namespace afrl::metrics
