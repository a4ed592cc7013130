#include "afrl/scan/scan.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "afrl/error.hpp"
#include "afrl/image/filters.hpp"
#include "afrl/metrics/focus_metrics.hpp"

namespace afrl::scan {

namespace {

void check_focal_power(double f) {
    if (!(f >= 0.0 && f <= 1.0)) {
        throw DomainError("focal power must lie in [0,1], got " + std::to_string(f));
    }
}

void check_frame_index(int t, int count) {
    if (t < 0 || t >= count) {
        throw IndexError("frame index " + std::to_string(t) + " outside [0," + std::to_string(count) + ")");
    }
}

const image::GrayImage& stack_image(const FocalStackScan& s, int t, double f) {
    check_frame_index(t, s.pose_count());
    check_focal_power(f);
    return s.images[static_cast<std::size_t>(t)][nearest_grid_index(s.focal_grid, f)];
}

}  // namespace

void SimulatedScan::validate() const {
    if (frames.empty()) throw ConfigError("simulated scan has no frames");
    if (frames.size() != f_star.size()) {
        throw ConfigError("simulated scan has " + std::to_string(frames.size()) + " frames but " +
                          std::to_string(f_star.size()) + " focus values");
    }
    for (const auto& frame : frames) {
        if (frame.width() != frames.front().width() || frame.height() != frames.front().height()) {
            throw ConfigError("simulated scan frames differ in size");
        }
    }
    for (double f : f_star) {
        if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("optimal focal power outside [0,1]");
    }
    if (!(sigma0 >= 2.0 && sigma0 <= 8.0)) {
        throw ConfigError("sigma0 must lie in [2,8], got " + std::to_string(sigma0));
    }
}

void FocalStackScan::validate() const {
    if (focal_grid.empty()) throw ConfigError("focal grid is empty");
    for (std::size_t k = 0; k < focal_grid.size(); ++k) {
        if (!(focal_grid[k] >= 0.0 && focal_grid[k] <= 1.0)) throw ConfigError("focal grid entry outside [0,1]");
        if (k > 0 && !(focal_grid[k] > focal_grid[k - 1])) {
            throw ConfigError("focal grid must be strictly ascending");
        }
    }
    for (std::size_t p = 0; p < images.size(); ++p) {
        if (images[p].size() != focal_grid.size()) {
            throw ConfigError("pose " + std::to_string(p) + " has " + std::to_string(images[p].size()) +
                              " images for a grid of " + std::to_string(focal_grid.size()));
        }
    }
    if (f_star && f_star->size() != images.size()) {
        throw ConfigError("focal stack f_star length does not match pose count");
    }
}

void SimulationConfig::validate() const {
    if (frames < 1) throw ConfigError("scan length must be >= 1");
    if (crop_size < 1) throw ConfigError("crop size must be >= 1");
    if (!(sigma0_min > 0.0 && sigma0_min <= sigma0_max)) throw ConfigError("invalid sigma0 range");
    walk.validate();
}

SimulatedScan build_simulated_scan(std::span<const image::GrayImage> source, const SimulationConfig& cfg,
                                   std::string source_id) {
    cfg.validate();
    if (source.empty()) throw ConfigError("no source frames supplied");
    const int src_w = source.front().width();
    const int src_h = source.front().height();
    for (const auto& frame : source) {
        if (frame.width() != src_w || frame.height() != src_h) {
            throw ConfigError("source frames of '" + source_id + "' differ in size");
        }
    }
    if (src_w < cfg.crop_size || src_h < cfg.crop_size) {
        throw ConfigError("source '" + source_id + "' is " + std::to_string(src_w) + "x" + std::to_string(src_h) +
                          ", smaller than the " + std::to_string(cfg.crop_size) + " pixel crop");
    }

    Rng rng(cfg.walk.seed);
    const std::array<double, 2> crop_lo{0.0, 0.0};
    const std::array<double, 2> crop_hi{static_cast<double>(src_w - cfg.crop_size),
                                        static_cast<double>(src_h - cfg.crop_size)};
    std::array<double, 2> crop_pos{std::uniform_real_distribution<double>(0.0, crop_hi[0])(rng),
                                   std::uniform_real_distribution<double>(0.0, crop_hi[1])(rng)};
    std::array<double, 2> crop_vel{0.0, 0.0};
    const std::array<double, 1> focus_lo{0.0};
    const std::array<double, 1> focus_hi{1.0};
    std::array<double, 1> focus_pos{std::uniform_real_distribution<double>(0.0, 1.0)(rng)};
    std::array<double, 1> focus_vel{0.0};

    SimulatedScan scan;
    scan.sigma0 = std::uniform_real_distribution<double>(cfg.sigma0_min, cfg.sigma0_max)(rng);
    scan.seed = cfg.walk.seed;
    scan.source_id = std::move(source_id);
    scan.frames.reserve(static_cast<std::size_t>(cfg.frames));
    scan.f_star.reserve(static_cast<std::size_t>(cfg.frames));

    const WalkParams crop_walk = cfg.walk.crop();
    const WalkParams focus_walk = cfg.walk.focus();
    for (int t = 0; t < cfg.frames; ++t) {
        const image::Rect rect{static_cast<int>(std::lround(crop_pos[0])), static_cast<int>(std::lround(crop_pos[1])),
                               cfg.crop_size, cfg.crop_size};
        const auto& src = source[static_cast<std::size_t>(t) % source.size()];
        scan.frames.push_back(image::quantize_8bit(image::crop(src, rect)));
        scan.f_star.push_back(focus_pos[0]);
        walk_step(crop_pos, crop_vel, crop_walk, crop_lo, crop_hi, rng);
        walk_step(focus_pos, focus_vel, focus_walk, focus_lo, focus_hi, rng);
    }
    return scan;
}

int frame_count(const Scan& scan) noexcept {
    return std::visit(
        [](const auto& s) {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, SimulatedScan>) {
                return s.frame_count();
            } else {
                return s.pose_count();
            }
        },
        scan);
}

std::optional<double> optimal_focus(const Scan& scan, int t) {
    if (const auto* sim = std::get_if<SimulatedScan>(&scan)) {
        check_frame_index(t, sim->frame_count());
        return sim->f_star[static_cast<std::size_t>(t)];
    }
    const auto& stack = std::get<FocalStackScan>(scan);
    check_frame_index(t, stack.pose_count());
    if (!stack.f_star) return std::nullopt;
    return (*stack.f_star)[static_cast<std::size_t>(t)];
}

std::size_t nearest_grid_index(std::span<const double> grid, double f) {
    if (grid.empty()) throw DomainError("focal grid is empty");
    std::size_t best = 0;
    double best_dist = std::abs(grid[0] - f);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double d = std::abs(grid[k] - f);
        if (d < best_dist) {
            best = k;
            best_dist = d;
        }
    }
    return best;
}

image::GrayImage env_step(const Scan& scan, int t, double f) {
    if (const auto* sim = std::get_if<SimulatedScan>(&scan)) {
        check_frame_index(t, sim->frame_count());
        check_focal_power(f);
        const auto i = static_cast<std::size_t>(t);
        return image::defocus_render(sim->frames[i], f, image::DefocusModel{sim->sigma0, sim->f_star[i]});
    }
    return stack_image(std::get<FocalStackScan>(scan), t, f);
}

image::GrayImage env_patch(const Scan& scan, int t, double f, int size) {
    if (const auto* sim = std::get_if<SimulatedScan>(&scan)) {
        check_frame_index(t, sim->frame_count());
        check_focal_power(f);
        const auto i = static_cast<std::size_t>(t);
        const auto& frame = sim->frames[i];
        return image::defocus_patch(frame, f, image::DefocusModel{sim->sigma0, sim->f_star[i]}, frame.width() / 2,
                                    frame.height() / 2, size);
    }
    return image::extract_center_patch(stack_image(std::get<FocalStackScan>(scan), t, f), size);
}

double oracle_optimal_focus(std::span<const image::GrayImage> stack, std::span<const double> focal_grid) {
    if (stack.empty()) throw DomainError("focal stack is empty");
    if (stack.size() != focal_grid.size()) {
        throw ShapeError("focal stack has " + std::to_string(stack.size()) + " images for " +
                         std::to_string(focal_grid.size()) + " focal powers");
    }
    std::size_t best = 0;
    double best_score = -1.0;
    for (std::size_t k = 0; k < stack.size(); ++k) {
        const auto& img = stack[k];
        const int size = std::min({kPatchSize, img.width(), img.height()});
        const double score = metrics::mgm(image::extract_center_patch(img, size));
        if (score > best_score) {
            best = k;
            best_score = score;
        }
    }
    return focal_grid[best];
}

}  // namespace afrl::scan
