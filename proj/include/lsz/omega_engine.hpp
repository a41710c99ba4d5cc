#pragma once

// Residue recursion for the correlator family Omega_{g,n}, templated on the
// curve so the same engine runs on the general numeric curve (double) and on
// the closed-form combinatorial-limit curve at double or >=100-bit precision.
//
// CurveT duck-typed interface:
//   using complex_t;
//   complex_t x(z), y(z), x_deriv(m, z) [m>=1], y_deriv(m, z);
//   complex_t lambda();
//   int n_branch();  complex_t beta(i);  real radius(i);
//   complex_t sigma(i, q);                      // local Galois involution
//   std::vector<complex_t> fiber_x(z);          // preimages besides z
//   int n_eps();  complex_t eps_point(n);  complex_t e_value(n);  double weight(n);
//   double scale();

#include <map>
#include <mutex>
#include <shared_mutex>
#include <vector>

#include "lsz/numerics.hpp"

namespace lsz {

struct LoopEquationResidual {
  double linear = 0;
  double linear_scale = 0;
  double quadratic = 0;
  double quadratic_scale = 0;
};

template <class CurveT>
class OmegaEngineT {
 public:
  using C = typename CurveT::complex_t;
  using CT = cplx_traits<C>;
  using R = typename CT::real_t;

  explicit OmegaEngineT(const CurveT& cv, QuadratureOptions quad = {})
      : cv_(cv), quad_(quad) {}

  const CurveT& curve() const { return cv_; }

  /// Omega_{g,n}(pts[0], ..., pts[n-1]).
  C omega(int g, const std::vector<C>& pts) {
    const int n = static_cast<int>(pts.size());
    if (n < 1 || g < 0 || 2 * g + n - 2 < -1)
      raise(ErrorCode::InvalidArgument, "omega: bad (g, n)");
    if (g == 0 && n == 1) return -cv_.y(pts[0]) / cv_.lambda();
    if (g == 0 && n == 2) return bergman(pts[0], pts[1]);

    Key key = make_key(g, pts);
    {
      std::shared_lock lk(mu_);
      auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    }
    C val = recurse(g, pts);
    {
      std::unique_lock lk(mu_);
      memo_.emplace(std::move(key), val);
    }
    return val;
  }

  /// Cylinder amplitude Omega_{0,2}.
  C bergman(const C& z1, const C& z2) const {
    C dz = z1 - z2;
    if (CT::abs(dz) < CT::from_double(1e-13 * cv_.scale()))
      raise(ErrorCode::PoleEvaluation, "Omega_{0,2} on the diagonal; use the regularized form");
    return C(1) / (cv_.x_deriv(1, z1) * cv_.x_deriv(1, z2) * dz * dz);
  }

  /// Finite diagonal part lim_{w->z} [Omega_{0,2}(z,w) - 1/(x(z)-x(w))^2].
  C bergman_diagonal(const C& z) const {
    C xp = cv_.x_deriv(1, z);
    C xpp = cv_.x_deriv(2, z);
    C xppp = cv_.x_deriv(3, z);
    C xp2 = xp * xp;
    return xpp * xpp / (C(4) * xp2 * xp2) - xppp / (C(6) * xp2 * xp);
  }

  /// Omega_{g-1,n+1}-style evaluation allowing coinciding points: routes the
  /// (0,2) diagonal through the regularized limit, everything else directly.
  C omega_diag(int g, const std::vector<C>& pts) {
    if (g == 0 && pts.size() == 2 &&
        CT::abs(pts[0] - pts[1]) < CT::from_double(1e-12 * cv_.scale()))
      return bergman_diagonal(pts[0]);
    return omega(g, pts);
  }

  /// Omega_1 at eps_p through the pole-cancelled combination; the p-term limit
  /// is the analytic ratio -x''/(2 x'^2).
  C omega1_regularized(int p) {
    C z = cv_.eps_point(p);
    C val = (z - cv_.x(z)) / cv_.lambda();
    for (int n = 0; n < cv_.n_eps(); ++n) {
      C w = C(cv_.weight(n));
      if (n == p) {
        C xp = cv_.x_deriv(1, z);
        val += w * (-cv_.x_deriv(2, z) / (C(2) * xp * xp));
      } else {
        C en = cv_.e_value(n);
        C epsn = cv_.eps_point(n);
        val += w * (C(1) / (cv_.e_value(p) - en) - C(1) / (cv_.x_deriv(1, epsn) * (z - epsn)));
      }
    }
    return val;
  }

  /// Omega_2 at eigenvalue points; the diagonal is the minimal-subtraction
  /// finite part.
  C omega2_regularized(int p, int q) {
    if (p == q) return bergman_diagonal(cv_.eps_point(p));
    return bergman(cv_.eps_point(p), cv_.eps_point(q));
  }

  /// d/dz_i Omega_{g,n} by a small Cauchy circle around pts[idx].
  C omega_arg_derivative(int g, std::vector<C> pts, int idx) {
    const C z0 = pts[idx];
    R rad = CT::from_double(0.08) * clearance(z0, pts, idx);
    const int m = 32;
    const R two_pi = R(2) * CT::pi();
    C acc(0);
    for (int j = 0; j < m; ++j) {
      R th = two_pi * R(j) / R(m);
      C u = CT::make(CT::cos(th), CT::sin(th));
      pts[idx] = z0 + rad * u;
      acc += omega(g, pts) / u;  // f(q)/(q-z0)^2 * dq collapses to f/u on the circle
    }
    return acc / (rad * R(double(m)));
  }

  /// Linear and quadratic loop-equation residuals at z for the family
  /// Omega_{g,n}(., I), |I| = n-1, 2g+n-2 > 0.
  LoopEquationResidual check_loop_equations(int g, const std::vector<C>& I, const C& z) {
    const int n = static_cast<int>(I.size()) + 1;
    if (2 * g + n - 2 <= 0)
      raise(ErrorCode::InvalidArgument, "check_loop_equations: need 2g+n-2 > 0");
    std::vector<C> fiber = cv_.fiber_x(z);
    fiber.insert(fiber.begin(), z);

    LoopEquationResidual out;
    C lin(0);
    R lin_scale(0);
    for (const auto& v : fiber) {
      C term = omega(g, cat(v, I));
      lin += term;
      lin_scale = std::max(lin_scale, CT::abs(term));
    }
    out.linear = CT::to_double(CT::abs(lin));
    out.linear_scale = CT::to_double(lin_scale);

    C lhs(0);
    R qscale(0);
    for (const auto& v : fiber) {
      C acc(0);
      const int m = static_cast<int>(I.size());
      for (int mask = 0; mask < (1 << m); ++mask) {
        std::vector<C> i1, i2;
        split(I, mask, i1, i2);
        for (int g1 = 0; g1 <= g; ++g1)
          acc += omega(g1, cat(v, i1)) * omega(g - g1, cat(v, i2));
      }
      if (g >= 1) acc += omega_diag(g - 1, cat2(v, v, I));
      lhs += C(0.5) * acc;
      qscale = std::max(qscale, CT::abs(C(0.5) * acc));
    }
    C rhs(0);
    const C xz = cv_.x(z);
    for (std::size_t i = 0; i < I.size(); ++i) {
      // d/dx(z_i) [ Omega_{g,n-1}(I) / (x(z)-x(z_i)) ]
      std::vector<C> rest = I;
      C zi = I[i];
      C om = (g == 0 && I.size() == 2)
                 ? bergman(I[0], I[1])
                 : omega(g, I);
      C dom = (I.size() == 1) ? omega_arg_derivative(g, {zi}, 0)
                              : omega_arg_derivative(g, I, static_cast<int>(i));
      C xpi = cv_.x_deriv(1, zi);
      C dx = xz - cv_.x(zi);
      rhs += dom / (xpi * dx) + om / (dx * dx);
      (void)rest;
    }
    for (int k = 0; k < cv_.n_eps(); ++k) {
      rhs -= C(cv_.weight(k)) * omega(g, cat(cv_.eps_point(k), I)) / (xz - cv_.e_value(k));
    }
    qscale = std::max(qscale, CT::abs(rhs));
    out.quadratic = CT::to_double(CT::abs(lhs - rhs));
    out.quadratic_scale = CT::to_double(qscale);
    return out;
  }

  /// Residue of omega_{g,1} = Omega_{g,1} x' dz around beta_i (must vanish).
  C omega_g1_residue(int g, int beta_index) {
    R rad = CT::from_double(0.75) * CT::from_double(radius_of(beta_index));
    return contour_residue_t<C>(
        [&](C q) { return omega(g, {q}) * cv_.x_deriv(1, q); }, cv_.beta(beta_index), rad,
        quad_);
  }

  /// Free energy for g >= 2 via the dilaton equation
  ///   sum_i Res_{beta_i} Phi(z) omega_{g,1}(z) = (2-2g) F_g,
  /// with Phi integrated term-wise from the local Taylor series of y x'.
  C free_energy(int g, double radius_factor = 1.0, double phi_constant = 0.0) {
    if (g < 2) raise(ErrorCode::InvalidArgument, "free_energy: needs g >= 2");
    for (int i = 0; i < cv_.n_branch(); ++i) {
      C res = omega_g1_residue(g, i);
      if (CT::to_double(CT::abs(res)) > 1e-8 * omega_g1_residue_scale(g, i))
        raise(ErrorCode::ResidueNotZero, "omega_{g,1} has nonzero residue at a branch point");
    }
    const int kTaylor = 18;
    C total(0);
    for (int i = 0; i < cv_.n_branch(); ++i) {
      C beta = cv_.beta(i);
      // Taylor coefficients of f = y * x' around beta via analytic derivatives
      std::vector<C> ycoef(kTaylor + 1), xpcoef(kTaylor + 1);
      ycoef[0] = cv_.y(beta);
      xpcoef[0] = cv_.x_deriv(1, beta);
      R fact(1);
      for (int m = 1; m <= kTaylor; ++m) {
        fact *= R(double(m));
        ycoef[m] = cv_.y_deriv(m, beta) / fact;
        xpcoef[m] = cv_.x_deriv(m + 1, beta) / fact;
      }
      std::vector<C> f(kTaylor + 1, C(0));
      for (int a = 0; a <= kTaylor; ++a)
        for (int b = 0; a + b <= kTaylor; ++b) f[a + b] += ycoef[a] * xpcoef[b];
      auto phi = [&](C q) {
        C dz = q - beta;
        C acc(phi_constant);
        C pw = dz;
        for (int m = 0; m <= kTaylor; ++m) {
          acc += f[m] * pw / C(double(m + 1));
          pw *= dz;
        }
        return acc;
      };
      R rad = CT::from_double(0.6 * radius_factor * radius_of(i));
      total += contour_residue_t<C>(
          [&](C q) { return phi(q) * omega(g, {q}) * cv_.x_deriv(1, q); }, beta, rad, quad_);
    }
    return total / C(double(2 - 2 * g));
  }

  std::size_t memo_size() const { return memo_.size(); }

 private:
  using Key = std::pair<int, std::vector<std::pair<std::int64_t, std::int64_t>>>;

  double radius_of(int i) const { return CT::to_double(CT::from_double(1.0) * cv_.radius(i)); }

  double omega_g1_residue_scale(int g, int i) {
    // typical magnitude of the integrand on the contour, for the zero test
    C q = cv_.beta(i) + CT::make(CT::from_double(0.5 * radius_of(i)), CT::from_double(0));
    return std::max(1e-30, CT::to_double(CT::abs(omega(g, {q}) * cv_.x_deriv(1, q))) *
                               radius_of(i));
  }

  static std::vector<C> cat(const C& a, const std::vector<C>& rest) {
    std::vector<C> v;
    v.reserve(rest.size() + 1);
    v.push_back(a);
    v.insert(v.end(), rest.begin(), rest.end());
    return v;
  }
  static std::vector<C> cat2(const C& a, const C& b, const std::vector<C>& rest) {
    std::vector<C> v;
    v.reserve(rest.size() + 2);
    v.push_back(a);
    v.push_back(b);
    v.insert(v.end(), rest.begin(), rest.end());
    return v;
  }
  static void split(const std::vector<C>& I, int mask, std::vector<C>& a, std::vector<C>& b) {
    a.clear();
    b.clear();
    for (std::size_t i = 0; i < I.size(); ++i)
      ((mask >> i) & 1 ? a : b).push_back(I[i]);
  }

  Key make_key(int g, const std::vector<C>& pts) const {
    // First point is the recursion variable; the rest is an unordered set.
    std::vector<std::pair<std::int64_t, std::int64_t>> q;
    q.reserve(pts.size());
    for (const auto& p : pts) q.push_back(quantize(p));
    std::sort(q.begin() + 1, q.end());
    return {g * 64 + static_cast<int>(pts.size()), std::move(q)};
  }

  std::pair<std::int64_t, std::int64_t> quantize(const C& z) const {
    // 1e-12 absolute grid for doubles; relative ~1e-30 grid for quad floats.
    double grain = std::is_same_v<C, cplx> ? 1e-12 : 1e-30;
    double re = CT::to_double(CT::re(z)), im = CT::to_double(CT::im(z));
    if constexpr (std::is_same_v<C, cplx>) {
      return {std::llround(re / grain), std::llround(im / grain)};
    } else {
      // quad path: quantize the high double plus a second limb
      double re2 = CT::to_double(CT::re(z) - CT::from_double(re));
      double im2 = CT::to_double(CT::im(z) - CT::from_double(im));
      auto pack = [](double hi, double lo) {
        return std::llround(hi / 1e-12) * 4096 + (std::llround(lo / 1e-25) & 4095);
      };
      return {pack(re, re2), pack(im, im2)};
    }
  }

  double clearance(const C& z, const std::vector<C>& pts, int skip_idx) const {
    double best = 0.25 * cv_.scale();
    for (int i = 0; i < cv_.n_branch(); ++i)
      best = std::min(best, CT::to_double(CT::abs(z - cv_.beta(i))));
    for (int n = 0; n < cv_.n_eps(); ++n)
      best = std::min(best, CT::to_double(CT::abs(z - cv_.eps_point(n))));
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (static_cast<int>(i) != skip_idx)
        best = std::min(best, CT::to_double(CT::abs(z - pts[i])));
    if (best <= 0) raise(ErrorCode::PoleEvaluation, "derivative circle collapsed");
    return best;
  }

  C recurse(int g, const std::vector<C>& pts) {
    const C z = pts[0];
    const std::vector<C> I(pts.begin() + 1, pts.end());
    const int m = static_cast<int>(I.size());
    C total(0);
    for (int i = 0; i < cv_.n_branch(); ++i) {
      const C beta = cv_.beta(i);
      double r = radius_of(i);
      for (const auto& p : pts) {
        double dist = CT::to_double(CT::abs(p - beta));
        if (dist < 2.0 * r) r = std::min(r, 0.4 * dist);
      }
      if (r < 1e-6 * cv_.scale())
        raise(ErrorCode::PointTooCloseToBranchPoint,
              "evaluation point too close to a ramification point");
      auto integrand = [&](C q) {
        C sq = cv_.sigma(i, q);
        C kernel = (C(1) / (z - q) - C(1) / (z - sq)) /
                   (C(2) * (cv_.y(q) - cv_.y(sq)));
        C bracket(0);
        for (int mask = 0; mask < (1 << m); ++mask) {
          std::vector<C> i1, i2;
          split(I, mask, i1, i2);
          for (int g1 = 0; g1 <= g; ++g1) {
            int g2 = g - g1;
            if (g1 == 0 && i1.empty()) continue;
            if (g2 == 0 && i2.empty()) continue;
            bracket += omega(g1, cat(q, i1)) * omega(g2, cat(sq, i2));
          }
        }
        if (g >= 1) bracket += omega(g - 1, cat2(q, sq, I));
        return kernel * cv_.x_deriv(1, q) * bracket;
      };
      total += contour_residue_t<C>(integrand, beta, CT::from_double(r), quad_);
    }
    return -cv_.lambda() * total / cv_.x_deriv(1, z);
  }

  const CurveT& cv_;
  QuadratureOptions quad_;
  std::map<Key, C> memo_;
  mutable std::shared_mutex mu_;
};

}  // namespace lsz
