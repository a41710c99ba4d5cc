#pragma once

// Planar 2-point function, generalized T-correlators via the residue
// formula, and the algebraic reduction of arbitrary multi-boundary
// correlation functions to (2+...+2)-point functions.

#include <map>
#include <optional>
#include <vector>

#include "lsz/tr_engine.hpp"

namespace lsz {

/// Identifies a correlator: genus, derivative markers (indices into the eps
/// list), and boundaries as cycles of alternating (eps-index, eps~-index)
/// pairs. Cycle length 2*pairs, always even.
struct CorrelatorKey {
  int g = 0;
  std::vector<int> deriv;
  std::vector<std::vector<std::pair<int, int>>> boundaries;
};

/// Canonical form: each boundary rotated to its lexicographically smallest
/// pair rotation (cyclic symmetry within a boundary), boundaries sorted.
CorrelatorKey canonical(const CorrelatorKey& key);

/// Lagrange interpolation through (nodes_j, values_j), evaluated at x.
cplx lagrange_interpolate(const std::vector<cplx>& nodes, const std::vector<cplx>& values,
                          cplx x);

struct CorrelatorOptions {
  /// Handle coinciding eigenvalue indices by perturbing the continuation
  /// argument and extrapolating h -> 0 instead of raising CoincidingIndices.
  bool coinciding_limit_mode = false;
  double limit_h = 3e-3;
  int max_depth = 64;
};

class CorrelatorEngine {
 public:
  using Boundary = std::vector<cplx>;  // alternating zeta/omega points, even length

  CorrelatorEngine(const SpectralCurve& cv, const RamificationData& ram, OmegaEvaluator& om,
                   CorrelatorOptions opt = {});

  /// Planar 2-point function. Evaluates the y-fiber product form and falls
  /// back to (and cross-checks against) the x-fiber form.
  cplx planar_two_point(cplx z, cplx w) const;

  /// Residual of the pole decomposition of the planar 2-point function
  /// (coefficients C_{k,l}^{m,n} from the eigenvalue fibers).
  double pole_decomposition_check(cplx z, cplx w) const;

  /// Complexified planar 2-point DSE residual,
  ///   (y(w)-y(z)) G(z,w) - 1 - lambda sum_k w_k G(eps_k,w)/(e_k - x(z)).
  double two_point_dse_residual(cplx z, cplx w) const;

  /// T^{(g)}(I || z,w | J) with a single active length-2 boundary (z,w) and
  /// the remaining boundaries all of length 2 (longer ones are reduced).
  cplx generalized_T(int g, const std::vector<cplx>& I, cplx z, cplx w,
                     const std::vector<Boundary>& J);

  /// Fully general T at z-plane points: reduces any boundary longer than one
  /// pair through the splitting/merging recursion, then applies the residue
  /// formula.
  cplx correlator(int g, const std::vector<cplx>& I, const std::vector<Boundary>& boundaries);

  /// Index-level entry point: boundaries of (eps-idx, eps~-idx) pairs.
  /// Raises CoincidingIndices on repeated indices unless the limit mode is on.
  cplx full_correlator(const CorrelatorKey& key);

  /// | Omega-side - G-side | of the correlation-function representation of
  /// Omega^{(g)}_n, per lambda-order up to `order` (n = indices.size() <= 3).
  /// Static because every lambda node needs a fresh curve solve.
  static std::vector<double> omega_from_G_residuals(const ModelSpec& spec, int g,
                                                    const std::vector<int>& indices, int order);

  /// x^{-1} / y^{-1} branches continued from a given start point.
  cplx x_inverse_near(cplx x_target, cplx start) const;
  cplx y_inverse_near(cplx y_target, cplx start) const;

  OmegaEvaluator& omega_evaluator() { return om_; }
  const SpectralCurve& curve() const { return cv_; }

 private:
  cplx t_resform(int g, std::vector<cplx> I, cplx z, cplx w, std::vector<Boundary> J, int depth);
  cplx reduce_boundary(int g, const std::vector<cplx>& I, std::vector<Boundary> bs, int depth);
  cplx correlator_impl(int g, const std::vector<cplx>& I, std::vector<Boundary> bs, int depth);
  cplx bracket(int g, const std::vector<cplx>& I, cplx t, cplx w, const std::vector<Boundary>& J,
               int depth);

  const SpectralCurve& cv_;
  const RamificationData& ram_;
  OmegaEvaluator& om_;
  CorrelatorOptions opt_;

  using TKey = std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>;
  std::map<TKey, cplx> memo_;
};

/// H/P consistency data for one (g, n) check.
struct HPResidual {
  double h_residual = 0;
  double h_scale = 0;
  double p_residual = 0;
  double p_scale = 0;
};

/// Computes H_{g,n}(v;z;I) from T-correlator sums and the fiber-sum form
/// (via E^{(k)}Omega products over subsets of the x-fiber of z), returns the
/// deviation; same for P. n = |I| + 1.
HPResidual check_H_P(CorrelatorEngine& eng, int g, const std::vector<cplx>& I, cplx z, cplx v);

/// Closed-form check of the lowest H/P:
///   H_{0,1}(v;z) = -prod_k (v - y(zhat^k))/(v - e~_k),
///   P_{0,1}(v;x(z)) = (v - y(z)) prod_k (v - y(zhat^k))/(v - e~_k).
struct H01P01Check {
  double h_residual = 0;
  double p_residual = 0;
};
H01P01Check check_H01_P01(CorrelatorEngine& eng, cplx z, cplx v);

}  // namespace lsz
