#pragma once

// Ramification points of x, local Galois involutions, and full preimage
// fibers under x and y. Fiber polynomials are assembled exactly from the
// known pole data, never by generic nonlinear solving.

#include <vector>

#include "lsz/spectral_curve.hpp"

namespace lsz {

struct RamificationData {
  std::vector<cplx> betas;     // 2*d~ simple zeros of x'
  std::vector<cplx> x_second;  // x''(beta_i)
  std::vector<double> radius;  // suggested contour radius per beta
};

/// Roots of the degree-2d~ numerator of x', Newton-polished, with contour
/// radii at half the distance to the nearest other singularity.
RamificationData ramification_points(const SpectralCurve& curve);

/// Local involution around beta_i: the preimage branch with
/// x(sigma(q)) = x(q), sigma(beta_i) = beta_i. Newton from the reflection.
cplx galois_involution(const SpectralCurve& curve, const RamificationData& ram, int beta_index,
                       cplx q);

/// The d~ solutions of x(v) = x(z) besides z itself.
std::vector<cplx> preimages_x(const SpectralCurve& curve, cplx z);
/// The d solutions of y(v) = y(w) besides w itself.
std::vector<cplx> preimages_y(const SpectralCurve& curve, cplx w);

/// Minimum lambda modulus below which fiber operations refuse to run (the
/// fiber polynomial degenerates at lambda = 0).
inline constexpr double kMinFiberLambda = 1e-8;

}  // namespace lsz
