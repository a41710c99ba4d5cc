#pragma once

#include <string>
#include <vector>

#include "lsz/numerics.hpp"

namespace lsz {

/// CLI entry point. Exit codes: 0 success, 1 validation/usage error,
/// 2 non-convergence, 3 check-suite failure.
int run(const std::vector<std::string>& argv);

/// Parses "a+bi;c+di;..." into complex points.
std::vector<cplx> parse_points(const std::string& text);

}  // namespace lsz
