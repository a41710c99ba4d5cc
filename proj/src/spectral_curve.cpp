#include "lsz/spectral_curve.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace lsz {

namespace {

constexpr double kPoleTol = 1e-13;

// Dense complex LU solve with partial pivoting; systems here are at most
// 2(d + d~) unknowns.
void lu_solve(std::vector<std::vector<cplx>>& a, std::vector<cplx>& b) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(a[col][col]);
    for (int r = col + 1; r < n; ++r) {
      double v = std::abs(a[r][col]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) raise(ErrorCode::NonConvergence, "singular Jacobian in curve solve");
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (int r = col + 1; r < n; ++r) {
      cplx f = a[r][col] / a[col][col];
      if (f == cplx(0.0)) continue;
      a[r][col] = 0;
      for (int c2 = col + 1; c2 < n; ++c2) a[r][c2] -= f * a[col][c2];
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    cplx s = b[r];
    for (int c2 = r + 1; c2 < n; ++c2) s -= a[r][c2] * b[c2];
    b[r] = s / a[r][r];
  }
}

struct Unknowns {
  std::vector<cplx> eps, eps_t, rho, rho_t;
};

// Residuals of {x(eps_n)-e_n, y(eps~_k)-e~_k, rho_n x'(eps_n)-r_n,
// rho~_k y'(eps~_k)-r~_k} and the analytic Jacobian.
void assemble(const ModelSpec& spec, cplx lambda, const Unknowns& u,
              std::vector<cplx>& F, std::vector<std::vector<cplx>>& J) {
  const int d = spec.d(), dt = spec.d_tilde();
  const int n_unknowns = 2 * (d + dt);
  const cplx lam_n = lambda / double(spec.n);
  F.assign(n_unknowns, cplx(0));
  J.assign(n_unknowns, std::vector<cplx>(n_unknowns, cplx(0)));

  auto ie = [&](int n) { return n; };             // eps block
  auto iet = [&](int k) { return d + k; };        // eps~ block
  auto ir = [&](int n) { return d + dt + n; };    // rho block
  auto irt = [&](int k) { return d + dt + d + k; };

  for (int n = 0; n < d; ++n) {
    cplx xp(1.0);
    cplx xv = u.eps[n];
    for (int k = 0; k < dt; ++k) {
      cplx dz = u.eps[n] - u.eps_t[k];
      xv += lam_n * u.rho_t[k] / dz;
      xp -= lam_n * u.rho_t[k] / (dz * dz);
    }
    // F1_n = x(eps_n) - e_n
    F[ie(n)] = xv - spec.e[n].value;
    J[ie(n)][ie(n)] = xp;
    for (int k = 0; k < dt; ++k) {
      cplx dz = u.eps[n] - u.eps_t[k];
      J[ie(n)][iet(k)] = lam_n * u.rho_t[k] / (dz * dz);
      J[ie(n)][irt(k)] = lam_n / dz;
    }
    // F3_n = rho_n x'(eps_n) - r_n
    F[ir(n)] = u.rho[n] * xp - double(spec.e[n].mult);
    J[ir(n)][ir(n)] = xp;
    for (int k = 0; k < dt; ++k) {
      cplx dz = u.eps[n] - u.eps_t[k];
      cplx cube = dz * dz * dz;
      J[ir(n)][ie(n)] += u.rho[n] * 2.0 * lam_n * u.rho_t[k] / cube;
      J[ir(n)][iet(k)] = -u.rho[n] * 2.0 * lam_n * u.rho_t[k] / cube;
      J[ir(n)][irt(k)] = -u.rho[n] * lam_n / (dz * dz);
    }
  }
  for (int k = 0; k < dt; ++k) {
    cplx yp(-1.0);
    cplx yv = -u.eps_t[k];
    for (int n = 0; n < d; ++n) {
      cplx dz = u.eps_t[k] - u.eps[n];
      yv += lam_n * u.rho[n] / dz;
      yp -= lam_n * u.rho[n] / (dz * dz);
    }
    // F2_k = y(eps~_k) - e~_k
    F[iet(k)] = yv - spec.e_tilde[k].value;
    J[iet(k)][iet(k)] = yp;
    for (int n = 0; n < d; ++n) {
      cplx dz = u.eps_t[k] - u.eps[n];
      J[iet(k)][ie(n)] = lam_n * u.rho[n] / (dz * dz);
      J[iet(k)][ir(n)] = lam_n / dz;
    }
    // F4_k = rho~_k y'(eps~_k) - r~_k
    F[irt(k)] = u.rho_t[k] * yp - double(spec.e_tilde[k].mult);
    J[irt(k)][irt(k)] = yp;
    for (int n = 0; n < d; ++n) {
      cplx dz = u.eps_t[k] - u.eps[n];
      cplx cube = dz * dz * dz;
      J[irt(k)][iet(k)] += u.rho_t[k] * 2.0 * lam_n * u.rho[n] / cube;
      J[irt(k)][ie(n)] = -u.rho_t[k] * 2.0 * lam_n * u.rho[n] / cube;
      J[irt(k)][ir(n)] = -u.rho_t[k] * lam_n / (dz * dz);
    }
  }
}

double spec_scale(const ModelSpec& spec) {
  double s = 1;
  for (const auto& ev : spec.e) s = std::max(s, std::abs(ev.value));
  for (const auto& ev : spec.e_tilde) s = std::max(s, std::abs(ev.value));
  return s;
}

// One Newton solve at fixed lambda; returns false on stagnation.
bool newton_at(const ModelSpec& spec, cplx lambda, Unknowns& u, const SolveOptions& opt,
               double scale) {
  const int d = spec.d(), dt = spec.d_tilde();
  std::vector<cplx> F;
  std::vector<std::vector<cplx>> J;
  for (int it = 0; it < opt.max_newton; ++it) {
    assemble(spec, lambda, u, F, J);
    double rnorm = 0;
    for (const auto& f : F) rnorm = std::max(rnorm, std::abs(f));
    if (rnorm <= opt.tol * scale) return true;
    std::vector<cplx> step = F;
    lu_solve(J, step);
    double snorm = 0;
    for (const auto& s : step) snorm = std::max(snorm, std::abs(s));
    if (!std::isfinite(snorm)) return false;
    if (snorm > 10.0 * scale) return false;  // diverging; caller refines homotopy
    for (int n = 0; n < d; ++n) u.eps[n] -= step[n];
    for (int k = 0; k < dt; ++k) u.eps_t[k] -= step[d + k];
    for (int n = 0; n < d; ++n) u.rho[n] -= step[d + dt + n];
    for (int k = 0; k < dt; ++k) u.rho_t[k] -= step[d + dt + d + k];
  }
  assemble(spec, lambda, u, F, J);
  double rnorm = 0;
  for (const auto& f : F) rnorm = std::max(rnorm, std::abs(f));
  return rnorm <= opt.tol * scale * 100.0;
}

void check_branch_separation(const Unknowns& u, double scale) {
  auto check = [&](const std::vector<cplx>& v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j)
        if (std::abs(v[i] - v[j]) < 1e-9 * scale)
          raise(ErrorCode::BranchCollision,
                std::string(what) + " collided along the homotopy path");
  };
  check(u.eps, "eps points");
  check(u.eps_t, "eps~ points");
}

}  // namespace

cplx SpectralCurve::x(cplx z) const {
  const cplx lam_n = lambda / double(spec.n);
  cplx v = z;
  for (int k = 0; k < d_tilde(); ++k) {
    cplx dz = z - eps_tilde[k];
    if (std::abs(dz) < kPoleTol * scale)
      raise(ErrorCode::PoleEvaluation, "x(z) evaluated at a pole eps~_k");
    v += lam_n * rho_tilde[k] / dz;
  }
  return v;
}

cplx SpectralCurve::y(cplx z) const {
  const cplx lam_n = lambda / double(spec.n);
  cplx v = -z;
  for (int n = 0; n < d(); ++n) {
    cplx dz = z - eps[n];
    if (std::abs(dz) < kPoleTol * scale)
      raise(ErrorCode::PoleEvaluation, "y(z) evaluated at a pole eps_n");
    v += lam_n * rho[n] / dz;
  }
  return v;
}

cplx SpectralCurve::x_prime(cplx z) const {
  const cplx lam_n = lambda / double(spec.n);
  cplx v = 1;
  for (int k = 0; k < d_tilde(); ++k) {
    cplx dz = z - eps_tilde[k];
    if (std::abs(dz) < kPoleTol * scale)
      raise(ErrorCode::PoleEvaluation, "x'(z) evaluated at a pole eps~_k");
    v -= lam_n * rho_tilde[k] / (dz * dz);
  }
  return v;
}

cplx SpectralCurve::y_prime(cplx z) const {
  const cplx lam_n = lambda / double(spec.n);
  cplx v = -1;
  for (int n = 0; n < d(); ++n) {
    cplx dz = z - eps[n];
    if (std::abs(dz) < kPoleTol * scale)
      raise(ErrorCode::PoleEvaluation, "y'(z) evaluated at a pole eps_n");
    v -= lam_n * rho[n] / (dz * dz);
  }
  return v;
}

cplx SpectralCurve::x_deriv(int m, cplx z) const {
  if (m < 1) raise(ErrorCode::InvalidArgument, "x_deriv: m >= 1");
  if (m == 1) return x_prime(z);
  const cplx lam_n = lambda / double(spec.n);
  double fact = 1;  // m!
  for (int i = 2; i <= m; ++i) fact *= i;
  double sign = (m % 2 == 0) ? 1.0 : -1.0;  // d^m/dz^m (z-a)^-1 = (-1)^m m! (z-a)^-(m+1)
  cplx v = 0;
  for (int k = 0; k < d_tilde(); ++k) {
    cplx dz = z - eps_tilde[k];
    v += lam_n * rho_tilde[k] * sign * fact / std::pow(dz, m + 1);
  }
  return v;
}

cplx SpectralCurve::y_deriv(int m, cplx z) const {
  if (m < 1) raise(ErrorCode::InvalidArgument, "y_deriv: m >= 1");
  if (m == 1) return y_prime(z);
  const cplx lam_n = lambda / double(spec.n);
  double fact = 1;
  for (int i = 2; i <= m; ++i) fact *= i;
  double sign = (m % 2 == 0) ? 1.0 : -1.0;
  cplx v = 0;
  for (int n = 0; n < d(); ++n) {
    cplx dz = z - eps[n];
    v += lam_n * rho[n] * sign * fact / std::pow(dz, m + 1);
  }
  return v;
}

cplx SpectralCurve::x_second(cplx z) const { return x_deriv(2, z); }
cplx SpectralCurve::x_third(cplx z) const { return x_deriv(3, z); }
cplx SpectralCurve::y_second(cplx z) const { return y_deriv(2, z); }

cplx SpectralCurve::v_prime(cplx x_val) const {
  const cplx lam_n = lambda / double(spec.n);
  cplx v = x_val;
  for (int n = 0; n < d(); ++n) {
    cplx dx = x_val - spec.e[n].value;
    if (std::abs(dx) < kPoleTol * scale)
      raise(ErrorCode::PoleEvaluation, "V'(x) evaluated at an eigenvalue e_n");
    v -= lam_n * double(spec.e[n].mult) / dx;
  }
  return v;
}

cplx SpectralCurve::vtilde_prime(cplx x_val) const {
  const cplx lam_n = lambda / double(spec.n);
  cplx v = x_val;
  for (int k = 0; k < d_tilde(); ++k) {
    cplx dx = x_val - spec.e_tilde[k].value;
    if (std::abs(dx) < kPoleTol * scale)
      raise(ErrorCode::PoleEvaluation, "V~'(x) evaluated at an eigenvalue e~_k");
    v -= lam_n * double(spec.e_tilde[k].mult) / dx;
  }
  return v;
}

Polynomial<cplx> SpectralCurve::fiber_poly_x(cplx xi) const {
  // (v - xi) prod_k (v - eps~_k) + (lambda/N) sum_k rho~_k prod_{l != k} (v - eps~_l)
  const cplx lam_n = lambda / double(spec.n);
  Polynomial<cplx> p = Polynomial<cplx>::root_factor(xi);
  for (int k = 0; k < d_tilde(); ++k) p *= Polynomial<cplx>::root_factor(eps_tilde[k]);
  for (int k = 0; k < d_tilde(); ++k) {
    Polynomial<cplx> term({lam_n * rho_tilde[k]});
    for (int l = 0; l < d_tilde(); ++l)
      if (l != k) term *= Polynomial<cplx>::root_factor(eps_tilde[l]);
    p += term;
  }
  return p;
}

Polynomial<cplx> SpectralCurve::fiber_poly_y(cplx eta) const {
  // (-v - eta) prod_n (v - eps_n) + (lambda/N) sum_n rho_n prod_{m != n} (v - eps_m),
  // negated to make it monic of degree d+1.
  const cplx lam_n = lambda / double(spec.n);
  Polynomial<cplx> p({-eta, cplx(-1.0)});
  for (int n = 0; n < d(); ++n) p *= Polynomial<cplx>::root_factor(eps[n]);
  for (int n = 0; n < d(); ++n) {
    Polynomial<cplx> term({lam_n * rho[n]});
    for (int m = 0; m < d(); ++m)
      if (m != n) term *= Polynomial<cplx>::root_factor(eps[m]);
    p += term;
  }
  std::vector<cplx> c = p.coeffs();
  for (auto& a : c) a = -a;
  return Polynomial<cplx>(std::move(c));
}

Polynomial<cplx> SpectralCurve::x_prime_numerator() const {
  // prod_k (v - eps~_k)^2 - (lambda/N) sum_k rho~_k prod_{l != k} (v - eps~_l)^2
  const cplx lam_n = lambda / double(spec.n);
  Polynomial<cplx> p({cplx(1.0)});
  for (int k = 0; k < d_tilde(); ++k) {
    auto f = Polynomial<cplx>::root_factor(eps_tilde[k]);
    p *= f;
    p *= f;
  }
  for (int k = 0; k < d_tilde(); ++k) {
    Polynomial<cplx> term({-lam_n * rho_tilde[k]});
    for (int l = 0; l < d_tilde(); ++l) {
      if (l == k) continue;
      auto f = Polynomial<cplx>::root_factor(eps_tilde[l]);
      term *= f;
      term *= f;
    }
    p += term;
  }
  return p;
}

std::string SpectralCurve::to_json() const {
  nlohmann::json j;
  auto dump = [](const std::vector<cplx>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& z : v) a.push_back({z.real(), z.imag()});
    return a;
  };
  j["eps"] = dump(eps);
  j["eps_tilde"] = dump(eps_tilde);
  j["rho"] = dump(rho);
  j["rho_tilde"] = dump(rho_tilde);
  j["residual"] = residual;
  return j.dump(2);
}

void SpectralCurve::write_json(const std::string& path) const {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::InvalidArgument, "cannot write " + path);
  out << to_json() << "\n";
}

SpectralCurve solve_curve_at(const ModelSpec& raw, cplx lambda, const SolveOptions& opt) {
  ValidateOptions vopt;
  vopt.strict_positive = false;  // positivity is checked by public validate()
  ModelSpec spec = validate(raw, vopt);
  const int d = spec.d(), dt = spec.d_tilde();
  const double scale = spec_scale(spec);

  Unknowns u;
  u.eps.resize(d);
  u.eps_t.resize(dt);
  u.rho.resize(d);
  u.rho_t.resize(dt);
  for (int n = 0; n < d; ++n) {
    u.eps[n] = spec.e[n].value;
    u.rho[n] = double(spec.e[n].mult);
  }
  for (int k = 0; k < dt; ++k) {
    u.eps_t[k] = -spec.e_tilde[k].value;
    u.rho_t[k] = -double(spec.e_tilde[k].mult);
  }

  if (lambda != cplx(0.0)) {
    double t = 0;
    double dt_step = 1.0 / std::max(1, opt.homotopy_steps);
    int halvings = 0;
    while (t < 1.0 - 1e-15) {
      double target = std::min(1.0, t + dt_step);
      Unknowns trial = u;
      if (newton_at(spec, lambda * target, trial, opt, scale)) {
        u = trial;
        t = target;
        check_branch_separation(u, scale);
      } else {
        dt_step /= 2;
        if (++halvings > opt.max_step_halvings)
          raise(ErrorCode::NonConvergence,
                "curve homotopy stalled; increase homotopy_steps or reduce |lambda|");
      }
    }
  }

  SpectralCurve curve;
  curve.spec = spec;
  curve.lambda = lambda;
  curve.eps = u.eps;
  curve.eps_tilde = u.eps_t;
  curve.rho = u.rho;
  curve.rho_tilde = u.rho_t;
  curve.scale = scale;
  std::vector<cplx> F;
  std::vector<std::vector<cplx>> J;
  assemble(spec, lambda, u, F, J);
  double rnorm = 0;
  for (const auto& f : F) rnorm = std::max(rnorm, std::abs(f));
  curve.residual = rnorm;
  return curve;
}

SpectralCurve solve_curve(const ModelSpec& spec, const SolveOptions& opt) {
  return solve_curve_at(spec, cplx(spec.lambda, 0.0), opt);
}

}  // namespace lsz
