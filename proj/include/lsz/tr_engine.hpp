#pragma once

// Double-precision front end of the residue recursion on a solved general
// curve, plus the loop-equation checker and free energies. The H/P
// consistency checks live in hp_checks.hpp (they consume the correlator
// engine).

#include <memory>

#include "lsz/omega_engine.hpp"
#include "lsz/ramification.hpp"

namespace lsz {

/// Adapter exposing SpectralCurve + RamificationData through the engine's
/// curve interface.
class GeneralCurve {
 public:
  using complex_t = cplx;

  GeneralCurve(const SpectralCurve& cv, const RamificationData& ram) : cv_(cv), ram_(ram) {}

  cplx x(cplx z) const { return cv_.x(z); }
  cplx y(cplx z) const { return cv_.y(z); }
  cplx x_deriv(int m, cplx z) const { return cv_.x_deriv(m, z); }
  cplx y_deriv(int m, cplx z) const { return cv_.y_deriv(m, z); }
  cplx lambda() const { return cv_.lambda; }
  int n_branch() const { return static_cast<int>(ram_.betas.size()); }
  cplx beta(int i) const { return ram_.betas[i]; }
  double radius(int i) const { return ram_.radius[i]; }
  cplx sigma(int i, cplx q) const { return galois_involution(cv_, ram_, i, q); }
  std::vector<cplx> fiber_x(cplx z) const { return preimages_x(cv_, z); }
  int n_eps() const { return cv_.d(); }
  cplx eps_point(int n) const { return cv_.eps[n]; }
  cplx e_value(int n) const { return cv_.e(n); }
  double weight(int n) const { return cv_.weight(n); }
  double scale() const { return cv_.scale; }

  const SpectralCurve& spectral_curve() const { return cv_; }
  const RamificationData& ramification() const { return ram_; }

 private:
  const SpectralCurve& cv_;
  const RamificationData& ram_;
};

/// Memoized evaluator of the Omega family on a solved curve.
class OmegaEvaluator {
 public:
  OmegaEvaluator(const SpectralCurve& cv, const RamificationData& ram)
      : view_(cv, ram), engine_(view_) {}

  cplx omega(int g, const std::vector<cplx>& pts) { return engine_.omega(g, pts); }
  cplx omega1_regularized(int p) { return engine_.omega1_regularized(p); }
  cplx omega2_regularized(int p, int q) { return engine_.omega2_regularized(p, q); }
  cplx bergman(cplx z1, cplx z2) const { return engine_.bergman(z1, z2); }
  cplx bergman_diagonal(cplx z) const { return engine_.bergman_diagonal(z); }
  LoopEquationResidual check_loop_equations(int g, const std::vector<cplx>& I, cplx z) {
    return engine_.check_loop_equations(g, I, z);
  }
  cplx omega_g1_residue(int g, int beta_index) { return engine_.omega_g1_residue(g, beta_index); }
  cplx free_energy(int g, double radius_factor = 1.0, double phi_constant = 0.0) {
    return engine_.free_energy(g, radius_factor, phi_constant);
  }
  cplx omega_arg_derivative(int g, std::vector<cplx> pts, int idx) {
    return engine_.omega_arg_derivative(g, std::move(pts), idx);
  }

  const GeneralCurve& view() const { return view_; }
  OmegaEngineT<GeneralCurve>& engine() { return engine_; }

 private:
  GeneralCurve view_;
  OmegaEngineT<GeneralCurve> engine_;
};

}  // namespace lsz
