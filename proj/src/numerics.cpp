#include "lsz/numerics.hpp"

#include <numeric>

namespace lsz {

namespace {

// Cauchy bound on root moduli of a monic-normalized polynomial.
double root_radius_bound(const std::vector<cplx>& c) {
  const double lead = std::abs(c.back());
  double m = 0;
  for (std::size_t i = 0; i + 1 < c.size(); ++i) m = std::max(m, std::abs(c[i]) / lead);
  return 1.0 + m;
}

cplx newton_polish(const Polynomial<cplx>& p, const Polynomial<cplx>& dp, cplx z,
                   int iters) {
  for (int it = 0; it < iters; ++it) {
    cplx f = p.eval(z);
    cplx df = dp.eval(z);
    if (std::abs(df) == 0.0) break;
    cplx step = f / df;
    z -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(z))) break;
  }
  return z;
}

}  // namespace

std::vector<cplx> poly_roots(const Polynomial<cplx>& p) {
  Polynomial<cplx> q = p;
  q.normalize();
  const int n = q.degree();
  if (n < 1) raise(ErrorCode::InvalidArgument, "poly_roots: degree must be >= 1");
  const auto& c = q.coeffs();
  double maxc = 0;
  for (const auto& a : c) maxc = std::max(maxc, std::abs(a));

  if (n == 1) {
    return {-c[0] / c[1]};
  }

  // Aberth-Ehrlich from staggered points on a circle inside the root bound.
  const double R = 0.8 * root_radius_bound(c);
  std::vector<cplx> z(n);
  for (int i = 0; i < n; ++i) {
    double th = 2.0 * M_PI * (i + 0.5) / n + 0.45;  // fixed stagger, no axis alignment
    z[i] = R * cplx(std::cos(th), std::sin(th));
  }
  Polynomial<cplx> dp = q.derivative();
  const int kMaxIter = 400;
  for (int it = 0; it < kMaxIter; ++it) {
    double moved = 0;
    for (int i = 0; i < n; ++i) {
      cplx f = q.eval(z[i]);
      cplx df = dp.eval(z[i]);
      if (std::abs(f) == 0.0) continue;
      cplx ratio = (std::abs(df) > 0) ? f / df : cplx(1e-3, 1e-3);
      cplx sum = 0;
      for (int j = 0; j < n; ++j)
        if (j != i) sum += 1.0 / (z[i] - z[j]);
      cplx denom = 1.0 - ratio * sum;
      cplx step = (std::abs(denom) > 1e-290) ? ratio / denom : ratio;
      z[i] -= step;
      moved = std::max(moved, std::abs(step) / std::max(1.0, std::abs(z[i])));
    }
    if (moved < 1e-15) break;
  }

  // Mandatory Newton polish; this sets the downstream accuracy floor.
  for (auto& r : z) r = newton_polish(q, dp, r, 60);

  for (const auto& r : z) {
    double growth = std::max(1.0, std::pow(std::abs(r), n));
    if (!(std::abs(q.eval(r)) <= 1e-12 * maxc * growth))
      raise(ErrorCode::NonConvergence, "poly_roots: polishing left residual above tolerance");
  }
  std::sort(z.begin(), z.end(), [](const cplx& a, const cplx& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return z;
}

cplx contour_residue(const std::function<cplx(cplx)>& f, cplx center, double radius,
                     const QuadratureOptions& opt) {
  if (!(radius > 0)) raise(ErrorCode::InvalidArgument, "contour_residue: radius must be > 0");
  return contour_residue_t<cplx>(f, center, radius, opt);
}

std::vector<cplx> taylor_extract(const std::function<cplx(cplx)>& f, double radius,
                                 int order, double rel_tol) {
  if (!(radius > 0) || order < 0)
    raise(ErrorCode::InvalidArgument, "taylor_extract: bad radius/order");
  int m = 64;
  while (m < 4 * (order + 1)) m *= 2;
  auto a = taylor_extract_fixed_t<cplx>(f, radius, order, m);
  auto b = taylor_extract_fixed_t<cplx>(f, radius, order, 2 * m);
  double scale = 0;
  for (const auto& v : b) scale = std::max(scale, std::abs(v));
  scale = std::max(scale, 1e-30);
  for (int k = 0; k <= order; ++k) {
    if (std::abs(a[k] - b[k]) > rel_tol * std::max(scale, std::abs(b[k])) + 1e-13)
      raise(ErrorCode::NonConvergence, "taylor_extract: node doubling not stable");
  }
  return b;
}

}  // namespace lsz
