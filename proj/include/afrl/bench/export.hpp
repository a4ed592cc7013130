#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "afrl/bench/evaluate.hpp"

namespace afrl::bench {

/// Centred moving average; the window is truncated at the sequence ends so
/// edge values average only the samples that exist.
std::vector<double> moving_average(std::span<const double> values, int window);

struct PathRow {
    std::string scan_id;
    int t = 0;
    double f_raw = 0.0;
    double f_smooth = 0.0;
    double f_star = 0.0;
    double abs_error = 0.0;
};

std::vector<PathRow> path_rows(const EvalReport& report, int smoothing_window = 5);

/// Writes scan_id,t,f_raw,f_smooth,f_star,abs_error at round-trip precision.
void export_paths(const EvalReport& report, const std::filesystem::path& path, int smoothing_window = 5);
void write_paths_csv(std::span<const PathRow> rows, const std::filesystem::path& path);

/// Throws FormatError on a bad header or malformed row.
std::vector<PathRow> read_paths_csv(const std::filesystem::path& path);

/// Recomputes f_smooth for rows grouped by scan_id (rows must be ordered by t within a scan).
void resmooth(std::vector<PathRow>& rows, int smoothing_window);

}  // namespace afrl::bench
