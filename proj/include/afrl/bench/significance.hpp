#pragma once

#include <cstdint>

#include "afrl/bench/evaluate.hpp"

namespace afrl::bench {

/// Two-sided paired bootstrap over per-frame absolute errors (a - b).
/// p = min(1, 2 * (min(#means <= 0, #means >= 0) + 1) / (iterations + 1)).
/// Throws ConfigError when the reports cover different (scan, frame) sets.
double paired_significance(const EvalReport& a, const EvalReport& b, int iterations = 10000,
                           std::uint64_t seed = 0);

}  // namespace afrl::bench
