#include "afrl/bench/significance.hpp"

#include <algorithm>
#include <random>
#include <vector>

#include "afrl/error.hpp"

namespace afrl::bench {

double paired_significance(const EvalReport& a, const EvalReport& b, int iterations, std::uint64_t seed) {
    if (iterations < 1) throw ConfigError("bootstrap iterations must be positive");
    if (a.scans.size() != b.scans.size()) throw ConfigError("reports cover different scan sets");
    std::vector<double> diffs;
    for (std::size_t s = 0; s < a.scans.size(); ++s) {
        const auto& sa = a.scans[s];
        const auto& sb = b.scans[s];
        if (sa.scan_id != sb.scan_id || sa.frames.size() != sb.frames.size()) {
            throw ConfigError("reports cover different scan sets at '" + sa.scan_id + "'");
        }
        for (std::size_t i = 0; i < sa.frames.size(); ++i) {
            if (sa.frames[i].t != sb.frames[i].t) throw ConfigError("reports cover different frames in " + sa.scan_id);
            diffs.push_back(sa.frames[i].abs_error - sb.frames[i].abs_error);
        }
    }
    if (diffs.empty()) throw ConfigError("reports contain no frames");

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, diffs.size() - 1);
    long count_le = 0;
    long count_ge = 0;
    for (int it = 0; it < iterations; ++it) {
        double sum = 0.0;
        for (std::size_t k = 0; k < diffs.size(); ++k) sum += diffs[pick(rng)];
        const double mean = sum / static_cast<double>(diffs.size());
        if (mean <= 0.0) ++count_le;
        if (mean >= 0.0) ++count_ge;
    }
    const double p = 2.0 * static_cast<double>(std::min(count_le, count_ge) + 1) / static_cast<double>(iterations + 1);
    return std::min(1.0, p);
}

}  // namespace afrl::bench
