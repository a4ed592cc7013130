#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "afrl/image/gray_image.hpp"
#include "afrl/scan/walk.hpp"

namespace afrl::scan {

inline constexpr int kPatchSize = 32;

/// A focal-time scan rendered on demand from sharp frames: at frame t the
/// scene is in focus at f_star[t] and defocus grows as sigma0 * |f_star[t] - f|.
struct SimulatedScan {
    std::vector<image::GrayImage> frames;
    std::vector<double> f_star;
    double sigma0 = 4.0;
    std::uint64_t seed = 0;
    std::string source_id;

    [[nodiscard]] int frame_count() const noexcept { return static_cast<int>(frames.size()); }
    /// Throws ConfigError if frames/f_star disagree, frames differ in size,
    /// any f_star leaves [0,1], or sigma0 leaves [2,8].
    void validate() const;

    friend bool operator==(const SimulatedScan&, const SimulatedScan&) = default;
};

/// Pre-captured focal stacks: one image per (pose, focal grid entry).
struct FocalStackScan {
    std::vector<double> focal_grid;
    std::vector<std::vector<image::GrayImage>> images;  // [pose][grid index]
    std::optional<std::vector<double>> f_star;
    std::uint64_t seed = 0;
    std::string source_id;

    [[nodiscard]] int pose_count() const noexcept { return static_cast<int>(images.size()); }
    /// Throws ConfigError unless the grid is strictly ascending inside [0,1]
    /// and every pose holds exactly one image per grid entry.
    void validate() const;

    friend bool operator==(const FocalStackScan&, const FocalStackScan&) = default;
};

using Scan = std::variant<SimulatedScan, FocalStackScan>;

struct SimulationConfig {
    int frames = 250;
    int crop_size = 128;
    double sigma0_min = 2.0;
    double sigma0_max = 8.0;
    WalkConfig walk;

    void validate() const;
};

/// Builds a simulated scan from a video (crop taken from frame t mod length)
/// or a single still (one-element span). Frames are quantized to 8 bits.
/// Fully determined by cfg.walk.seed. Throws ConfigError when a source frame
/// is smaller than the crop or the source frames differ in size.
SimulatedScan build_simulated_scan(std::span<const image::GrayImage> source, const SimulationConfig& cfg,
                                   std::string source_id);

int frame_count(const Scan& scan) noexcept;

/// Ground-truth optimal focal power at frame t, if the scan carries one.
std::optional<double> optimal_focus(const Scan& scan, int t);

/// Index of the grid entry nearest to f; equidistant entries resolve to the lower index.
std::size_t nearest_grid_index(std::span<const double> grid, double f);

/// The full frame an agent observes at frame t with focal power f. Throws
/// IndexError for t out of range and DomainError for f outside [0,1].
image::GrayImage env_step(const Scan& scan, int t, double f);

/// The centred patch of env_step(scan, t, f), computed without rendering the
/// whole frame (bitwise identical to cropping the full render).
image::GrayImage env_patch(const Scan& scan, int t, double f, int size = kPatchSize);

/// Focal power whose image has the highest MGM over the centred 32x32 patch
/// (the whole image if smaller). Ties go to the lower grid index.
double oracle_optimal_focus(std::span<const image::GrayImage> stack, std::span<const double> focal_grid);

}  // namespace afrl::scan
