#pragma once

#include <string_view>

#include "afrl/image/gray_image.hpp"

namespace afrl::metrics {

/// Mean Sobel gradient magnitude: (1/n) * sum_p sqrt(Ix^2 + Iy^2).
double mgm(const image::GrayImage& img);

/// Mean local ratio: (1/n) * sum_p max((G(I)+1)/(I+1), (I+1)/(G(I)+1)), where
/// G is a Gaussian blur of width `sigma`. Always >= 1 for intensities >= 0.
double mlr(const image::GrayImage& img, double sigma);

inline constexpr double kDefaultMlrSigma = 4.0;

struct MetricKind {
    enum class Kind { Mgm, Mlr };

    Kind kind = Kind::Mgm;
    double mlr_sigma = kDefaultMlrSigma;

    static MetricKind mgm() { return {Kind::Mgm, kDefaultMlrSigma}; }
    static MetricKind mlr(double sigma = kDefaultMlrSigma) { return {Kind::Mlr, sigma}; }

    /// Throws ConfigError for a non-positive mlr_sigma.
    void validate() const;
    [[nodiscard]] std::string_view name() const noexcept;

    friend bool operator==(const MetricKind&, const MetricKind&) = default;
};

/// Parses "mgm" / "mlr" (case-sensitive); throws ConfigError otherwise.
MetricKind parse_metric_kind(std::string_view name);

double evaluate_metric(const MetricKind& kind, const image::GrayImage& patch);

}  // namespace afrl::metrics
