#include "afrl/bench/export.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "afrl/error.hpp"

namespace afrl::bench {

namespace {

constexpr const char* kHeader = "scan_id,t,f_raw,f_smooth,f_star,abs_error";

double parse_double(const std::string& field, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw FormatError("paths.csv line " + std::to_string(line) + ": bad number '" + field + "'");
    }
    return v;
}

}  // namespace

std::vector<double> moving_average(std::span<const double> values, int window) {
    if (window < 1) throw DomainError("smoothing window must be at least 1");
    const auto n = static_cast<long>(values.size());
    const long before = window / 2;
    const long after = window - 1 - before;
    std::vector<double> out(values.size());
    for (long i = 0; i < n; ++i) {
        const long lo = std::max(0L, i - before);
        const long hi = std::min(n - 1, i + after);
        double sum = 0.0;
        for (long j = lo; j <= hi; ++j) sum += values[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
}

std::vector<PathRow> path_rows(const EvalReport& report, int smoothing_window) {
    std::vector<PathRow> rows;
    for (const auto& s : report.scans) {
        std::vector<double> raw;
        raw.reserve(s.frames.size());
        for (const auto& fr : s.frames) raw.push_back(fr.f);
        const auto smooth = moving_average(raw, smoothing_window);
        for (std::size_t i = 0; i < s.frames.size(); ++i) {
            const auto& fr = s.frames[i];
            rows.push_back({s.scan_id, fr.t, fr.f, smooth[i], fr.f_star, fr.abs_error});
        }
    }
    return rows;
}

void write_paths_csv(std::span<const PathRow> rows, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    out << kHeader << '\n';
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, ",%d,%.17g,%.17g,%.17g,%.17g\n", r.t, r.f_raw, r.f_smooth, r.f_star,
                      r.abs_error);
        out << r.scan_id << buf;
    }
    if (!out) throw FormatError("cannot write " + path.string());
}

void export_paths(const EvalReport& report, const std::filesystem::path& path, int smoothing_window) {
    write_paths_csv(path_rows(report, smoothing_window), path);
}

std::vector<PathRow> read_paths_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kHeader) throw FormatError(path.string() + ": unexpected header");
    std::vector<PathRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 6) throw FormatError("paths.csv line " + std::to_string(lineno) + ": expected 6 fields");
        PathRow r;
        r.scan_id = fields[0];
        r.t = static_cast<int>(parse_double(fields[1], lineno));
        r.f_raw = parse_double(fields[2], lineno);
        r.f_smooth = parse_double(fields[3], lineno);
        r.f_star = parse_double(fields[4], lineno);
        r.abs_error = parse_double(fields[5], lineno);
        rows.push_back(std::move(r));
    }
    return rows;
}

void resmooth(std::vector<PathRow>& rows, int smoothing_window) {
    std::size_t begin = 0;
    while (begin < rows.size()) {
        std::size_t end = begin;
        while (end < rows.size() && rows[end].scan_id == rows[begin].scan_id) ++end;
        std::vector<double> raw;
        for (std::size_t i = begin; i < end; ++i) raw.push_back(rows[i].f_raw);
        const auto smooth = moving_average(raw, smoothing_window);
        for (std::size_t i = begin; i < end; ++i) rows[i].f_smooth = smooth[i - begin];
        begin = end;
    }
}

}  // namespace afrl::bench
