#pragma once

// Closed-form combinatorial limit (d = d~ = 1), map-count extraction, the
// Tutte cross-check, and the one-cut check at vanishing second field.

#include <string>
#include <vector>

#include "lsz/omega_engine.hpp"
#include "lsz/spectral_curve.hpp"

namespace lsz {

/// Closed-form curve data for a single N-fold degenerate eigenvalue on each
/// side. Stores the same convention as SpectralCurve (rho = r/x'(eps),
/// rho~ = r~/y'(eps~)); the discriminant root is s = sqrt((e+e~)^2+12 lambda).
struct CombLimitCurve {
  double e = 0, e_tilde = 0;
  double lambda = 0;
  cplx eps, eps_tilde, rho_over_n, rho_tilde_over_n;

  /// Cross-checked against solve_curve on construction (1e-10).
  static CombLimitCurve make(double e, double e_tilde, double lambda);
};

/// Closed-form comb-limit curve over any complex scalar, implementing the
/// engine's curve interface. Weights are r/N = 1.
template <class C>
class CombCurveT {
 public:
  using complex_t = C;
  using CT = cplx_traits<C>;
  using R = typename CT::real_t;

  CombCurveT(const R& e, const R& et, const C& lam) : e_(e), et_(et), lam_(lam) {
    const R sum = e_ + et_;
    const C disc = C(sum * sum) + C(12) * lam_;
    const C s = CT::sqrt(disc);  // branch continued from +|e+et| at lambda=0
    eps_ = (C(5) * C(e_) - C(et_) + s) / C(6);
    epst_ = (C(e_) - C(5) * C(et_) - s) / C(6);
    // rho/N = (2/3)(1 + 1/(sqrt(1+u)+1)), u = 12 lambda/(e+et)^2; exact
    // rationalization of the closed form, stable at lambda -> 0
    const C sq1u = s / C(sum);
    rho_ = C(2) / C(3) * (C(1) + C(1) / (sq1u + C(1)));
    rhot_ = -rho_;
    betas_[0] = epst_ + CT::sqrt(lam_ * rhot_);
    betas_[1] = epst_ - CT::sqrt(lam_ * rhot_);
    R d01 = CT::abs(betas_[0] - betas_[1]);
    R d0e = CT::abs(betas_[0] - epst_);
    R d0p = CT::abs(betas_[0] - eps_);
    R d1p = CT::abs(betas_[1] - eps_);
    radius_[0] = CT::to_double(std::min(std::min(d01, d0e), d0p)) * 0.5;
    radius_[1] = CT::to_double(std::min(std::min(d01, d0e), d1p)) * 0.5;
  }

  C x(C z) const { return z + lam_ * rhot_ / (z - epst_); }
  C y(C z) const { return -z + lam_ * rho_ / (z - eps_); }
  C x_deriv(int m, C z) const {
    if (m == 1) return C(1) - lam_ * rhot_ / pow_int(z - epst_, 2);
    C sign = (m % 2 == 0) ? C(1) : C(-1);
    return lam_ * rhot_ * sign * C(fact(m)) / pow_int(z - epst_, m + 1);
  }
  C y_deriv(int m, C z) const {
    if (m == 1) return C(-1) - lam_ * rho_ / pow_int(z - eps_, 2);
    C sign = (m % 2 == 0) ? C(1) : C(-1);
    return lam_ * rho_ * sign * C(fact(m)) / pow_int(z - eps_, m + 1);
  }
  C lambda() const { return lam_; }
  int n_branch() const { return 2; }
  C beta(int i) const { return betas_[i]; }
  double radius(int i) const { return radius_[i]; }
  /// Global involution: x(v)=x(q) iff (v-eps~)(q-eps~) = lambda rho~.
  C sigma(int, C q) const { return epst_ + lam_ * rhot_ / (q - epst_); }
  std::vector<C> fiber_x(C z) const { return {sigma(0, z)}; }
  int n_eps() const { return 1; }
  C eps_point(int) const { return eps_; }
  C e_value(int) const { return C(e_); }
  double weight(int) const { return 1.0; }
  double scale() const { return std::max(1.0, std::max(CT::to_double(e_), CT::to_double(et_))); }

 private:
  static double fact(int m) {
    double f = 1;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
  }
  static C pow_int(C b, int p) {
    C r(1);
    for (int i = 0; i < p; ++i) r *= b;
    return r;
  }
  R e_, et_;
  C lam_;
  C eps_, epst_, rho_, rhot_;
  C betas_[2];
  double radius_[2];
};

struct MapCountOptions {
  double radius = 1.0 / 64.0;
  int nodes = 256;
  int max_radius_doublings = 2;
  int precision_bits = 53;  // > 64 switches to the quad-precision engine
  int threads = 0;          // 0: hardware concurrency
};

struct MapCountRow {
  int g = 0, n = 0, order = 0;
  long long count = 0;
  double raw = 0;
  double abs_error = 0;
};

/// Table of map counts: lambda-coefficients of the regularized Omega_{g,n}
/// at coinciding eps in the combinatorial limit (e = e~ = 1/2), rounded to
/// integers with a guard; the radius is doubled on guard failure.
std::vector<MapCountRow> map_counts(int g, int n, int max_order,
                                    const MapCountOptions& opt = {});

std::string map_counts_csv(const std::vector<MapCountRow>& rows);

/// Planar 2-point lambda-coefficients in the comb limit against the closed
/// rooted-quadrangulation count 2*3^n (2n)!/(n!(n+2)!).
struct TutteRow {
  int order = 0;
  double computed = 0;
  double expected = 0;
  double rel_error = 0;
};
std::vector<TutteRow> tutte_check(int max_order, const MapCountOptions& opt = {});

/// Closed form of the expected coefficient (b=1, n1=2 rooted planar
/// quadrangulations).
double tutte_number(int n);

/// Branch points of the one-cut form at e~ = 0.
struct OneCutData {
  cplx b1, b2;
};

/// Solves the d~=1, e~=0 model, builds the one-cut data from
/// b1+b2 = 2 eps~, (b1-b2)^2 = 16 lambda/y'(eps~), and compares the closed
/// one-cut resolvent form against the pole-cancelled Omega_1 on a grid of
/// x-values. Returns the maximum residual.
double lsz_tilde_zero_check(const ModelSpec& spec_with_etilde_zero, int grid_points,
                            unsigned long long seed, OneCutData* out_data = nullptr);

}  // namespace lsz
