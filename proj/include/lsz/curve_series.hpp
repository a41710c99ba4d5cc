#pragma once

// Exact lambda-expansion of the curve data by order-by-order fixed-point
// iteration over big rationals. Serves as an independent oracle for the
// Newton/homotopy solver.

#include "lsz/model.hpp"
#include "lsz/rational_series.hpp"

namespace lsz {

struct CurveSeries {
  std::vector<RationalSeries> eps, eps_tilde, rho, rho_tilde;
  int order = 0;
};

/// K+1 exact coefficients per unknown. The fixed-point map gains one
/// lambda-order per sweep, so K+1 sweeps suffice.
CurveSeries solve_curve_series(const RationalModel& model, int order);

}  // namespace lsz
