#pragma once

// Numerical solution of the coupled implicit system defining the rational
// spectral curve x(z), y(z), plus evaluators for the curve functions and the
// deformed potentials. The lambda-exact counterpart lives in curve_series.hpp.

#include <vector>

#include "lsz/model.hpp"
#include "lsz/numerics.hpp"

namespace lsz {

struct SolveOptions {
  int homotopy_steps = 32;
  double tol = 1e-13;       // Newton residual target (relative to scale)
  int max_newton = 60;
  int max_step_halvings = 12;
};

/// Solved curve data. With w_n = r_n/N and wt_k = r~_k/N:
///
///   x(z) = z + lambda * sum_k wt_k * rho~_k/r~_k / (z - eps~_k)
///   y(z) = -z + lambda * sum_n w_n * rho_n/r_n / (z - eps_n)
///
/// pinned by x(eps_n) = e_n, y(eps~_k) = e~_k, rho_n x'(eps_n) = r_n,
/// rho~_k y'(eps~_k) = r~_k. At lambda = 0: eps = e, eps~ = -e~, rho = r,
/// rho~ = -r~.
struct SpectralCurve {
  ModelSpec spec;  // canonical
  cplx lambda{0.0, 0.0};
  std::vector<cplx> eps, eps_tilde, rho, rho_tilde;
  double residual = 0;
  double scale = 1;

  int d() const { return static_cast<int>(eps.size()); }
  int d_tilde() const { return static_cast<int>(eps_tilde.size()); }
  double e(int n) const { return spec.e[n].value; }
  double e_tilde(int k) const { return spec.e_tilde[k].value; }
  double weight(int n) const { return double(spec.e[n].mult) / double(spec.n); }
  double weight_tilde(int k) const { return double(spec.e_tilde[k].mult) / double(spec.n); }

  cplx x(cplx z) const;
  cplx y(cplx z) const;
  cplx x_prime(cplx z) const;
  cplx y_prime(cplx z) const;
  cplx x_second(cplx z) const;
  cplx x_third(cplx z) const;
  cplx y_second(cplx z) const;
  /// m-th derivative, m >= 1 (analytic closed form).
  cplx x_deriv(int m, cplx z) const;
  cplx y_deriv(int m, cplx z) const;

  cplx v_prime(cplx x_val) const;        // V'(x)  = x - (lambda/N) sum_n r_n/(x - e_n)
  cplx vtilde_prime(cplx x_val) const;   // V~'(x) = x - (lambda/N) sum_k r~_k/(x - e~_k)

  /// Numerator/denominator of x(v) - xi as exact polynomial data (cleared
  /// denominators); degree d~+1, monic.
  Polynomial<cplx> fiber_poly_x(cplx xi) const;
  /// Same for y(v) - eta; degree d+1, monic after normalization.
  Polynomial<cplx> fiber_poly_y(cplx eta) const;
  /// Numerator of x'(z); degree 2*d~, monic.
  Polynomial<cplx> x_prime_numerator() const;

  void write_json(const std::string& path) const;
  std::string to_json() const;
};

/// Newton with lambda-homotopy from the free theory to spec.lambda; returns
/// the solution branch continuously connected to lambda = 0.
SpectralCurve solve_curve(const ModelSpec& spec, const SolveOptions& opt = {});

/// Continuation to a complex coupling (used for Taylor-coefficient
/// extraction on lambda-circles); the homotopy path is the straight segment.
SpectralCurve solve_curve_at(const ModelSpec& spec, cplx lambda, const SolveOptions& opt = {});

}  // namespace lsz
