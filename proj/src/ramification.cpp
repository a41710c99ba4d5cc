#include "lsz/ramification.hpp"

#include <algorithm>
#include <cmath>

namespace lsz {

namespace {

void require_fiber_lambda(const SpectralCurve& curve, const char* op) {
  if (std::abs(curve.lambda) < kMinFiberLambda)
    raise(ErrorCode::InvalidArgument,
          std::string(op) + ": fiber operations need |lambda| >= 1e-8 (x is degree 1 at lambda=0)");
}

// Remove the root closest to z; degeneracy if the two closest are within
// 1e-3 relative of each other.
std::vector<cplx> drop_self(std::vector<cplx> roots, cplx z, double scale) {
  std::size_t best = 0, second = 1;
  double d0 = 1e300, d1 = 1e300;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    double d = std::abs(roots[i] - z);
    if (d < d0) {
      d1 = d0;
      second = best;
      d0 = d;
      best = i;
    } else if (d < d1) {
      d1 = d;
      second = i;
    }
  }
  (void)second;
  if (roots.size() > 1 && d1 - d0 < 1e-3 * std::max(d1, 1e-30) && d1 < 0.1 * scale)
    raise(ErrorCode::FiberDegeneracy, "ambiguous self-removal in fiber");
  roots.erase(roots.begin() + best);
  return roots;
}

}  // namespace

RamificationData ramification_points(const SpectralCurve& curve) {
  require_fiber_lambda(curve, "ramification_points");
  Polynomial<cplx> num = curve.x_prime_numerator();
  std::vector<cplx> betas = poly_roots(num);
  const int expected = 2 * curve.d_tilde();
  if (static_cast<int>(betas.size()) != expected)
    raise(ErrorCode::DegenerateRamification, "x' numerator degree dropped below 2*d~");

  // Newton polish on x'(z) itself (the cleared polynomial can be worse
  // conditioned than the rational form).
  for (auto& b : betas) {
    for (int it = 0; it < 40; ++it) {
      cplx f = curve.x_prime(b);
      cplx df = curve.x_second(b);
      if (std::abs(df) == 0.0) break;
      cplx step = f / df;
      b -= step;
      if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(b))) break;
    }
    if (std::abs(curve.x_prime(b)) > 1e-10 * curve.scale)
      raise(ErrorCode::NonConvergence, "ramification point polish failed");
  }

  for (std::size_t i = 0; i < betas.size(); ++i)
    for (std::size_t j = i + 1; j < betas.size(); ++j)
      if (std::abs(betas[i] - betas[j]) < 1e-8 * curve.scale)
        raise(ErrorCode::DegenerateRamification,
              "two ramification points within 1e-8; outside the simple-branch-point regime");

  RamificationData ram;
  ram.betas = betas;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    cplx xpp = curve.x_second(betas[i]);
    if (std::abs(xpp) <= 1e-8 * curve.scale)
      raise(ErrorCode::DegenerateRamification, "x'' vanishes at a ramification point");
    ram.x_second.push_back(xpp);
    double dist = 1e300;
    for (std::size_t j = 0; j < betas.size(); ++j)
      if (j != i) dist = std::min(dist, std::abs(betas[i] - betas[j]));
    for (const auto& p : curve.eps_tilde) dist = std::min(dist, std::abs(betas[i] - p));
    for (const auto& p : curve.eps) dist = std::min(dist, std::abs(betas[i] - p));
    ram.radius.push_back(0.5 * dist);
  }
  return ram;
}

cplx galois_involution(const SpectralCurve& curve, const RamificationData& ram, int beta_index,
                       cplx q) {
  const cplx beta = ram.betas[beta_index];
  const double r = ram.radius[beta_index];
  const double dq = std::abs(q - beta);
  if (dq < 1e-14 * curve.scale) return q;  // fixed point
  const cplx target = curve.x(q);
  cplx v = 2.0 * beta - q;  // reflection through the branch point
  for (int it = 0; it < 60; ++it) {
    cplx f = curve.x(v) - target;
    cplx df = curve.x_prime(v);
    if (std::abs(df) == 0.0) break;
    cplx step = f / df;
    v -= step;
    if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(v))) break;
  }
  if (std::abs(curve.x(v) - target) > 1e-10 * curve.scale)
    raise(ErrorCode::BranchEscape, "involution Newton did not converge");
  if (std::abs(v - q) < 0.2 * dq)
    raise(ErrorCode::BranchEscape, "involution converged back to the input point");
  if (std::abs(v - beta) > 2.5 * std::max(r, dq))
    raise(ErrorCode::BranchEscape, "involution left the local disk");
  return v;
}

std::vector<cplx> preimages_x(const SpectralCurve& curve, cplx z) {
  require_fiber_lambda(curve, "preimages_x");
  const cplx xi = curve.x(z);
  std::vector<cplx> roots = poly_roots(curve.fiber_poly_x(xi));
  // polish on the rational form
  for (auto& v : roots) {
    for (int it = 0; it < 30; ++it) {
      cplx f = curve.x(v) - xi;
      cplx df = curve.x_prime(v);
      if (std::abs(df) < 1e-14) break;
      cplx step = f / df;
      v -= step;
      if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(v))) break;
    }
  }
  return drop_self(std::move(roots), z, curve.scale);
}

std::vector<cplx> preimages_y(const SpectralCurve& curve, cplx w) {
  require_fiber_lambda(curve, "preimages_y");
  const cplx eta = curve.y(w);
  std::vector<cplx> roots = poly_roots(curve.fiber_poly_y(eta));
  for (auto& v : roots) {
    for (int it = 0; it < 30; ++it) {
      cplx f = curve.y(v) - eta;
      cplx df = curve.y_prime(v);
      if (std::abs(df) < 1e-14) break;
      cplx step = f / df;
      v -= step;
      if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(v))) break;
    }
  }
  return drop_self(std::move(roots), w, curve.scale);
}

}  // namespace lsz
