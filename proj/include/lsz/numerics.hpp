#pragma once

// Self-contained complex-arithmetic utilities: polynomial root finding,
// contour quadrature for residues, Cauchy-integral Taylor coefficients.
// Everything is templated on the complex scalar so the same code runs on
// machine doubles and on >=100-bit floats (Boost cpp_complex_quad).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "lsz/errors.hpp"

namespace lsz {

using cplx = std::complex<double>;
using cplx_q = boost::multiprecision::cpp_complex_quad;  // 113-bit mantissa

/// Minimal trait layer the templated numerics need from a complex type.
template <class C>
struct cplx_traits;

template <>
struct cplx_traits<cplx> {
  using real_t = double;
  static cplx make(real_t re, real_t im) { return {re, im}; }
  static real_t re(const cplx& z) { return z.real(); }
  static real_t im(const cplx& z) { return z.imag(); }
  static real_t abs(const cplx& z) { return std::abs(z); }
  static real_t pi() { return 3.141592653589793238462643383279502884; }
  static real_t from_double(double x) { return x; }
  static double to_double(const real_t& x) { return x; }
  static real_t cos(real_t x) { return std::cos(x); }
  static real_t sin(real_t x) { return std::sin(x); }
  static cplx sqrt(const cplx& z) { return std::sqrt(z); }
  static cplx to_std(const cplx& z) { return z; }
  static real_t epsilon() { return 2.220446049250313e-16; }
};

template <>
struct cplx_traits<cplx_q> {
  using real_t = boost::multiprecision::cpp_bin_float_quad;
  static cplx_q make(const real_t& re, const real_t& im) { return {re, im}; }
  static real_t re(const cplx_q& z) { return z.real(); }
  static real_t im(const cplx_q& z) { return z.imag(); }
  static real_t abs(const cplx_q& z) { return boost::multiprecision::abs(z); }
  static real_t pi() { return boost::math::constants::pi<real_t>(); }
  static real_t from_double(double x) { return real_t(x); }
  static double to_double(const real_t& x) { return x.convert_to<double>(); }
  static real_t cos(const real_t& x) { return boost::multiprecision::cos(x); }
  static real_t sin(const real_t& x) { return boost::multiprecision::sin(x); }
  static cplx_q sqrt(const cplx_q& z) { return boost::multiprecision::sqrt(z); }
  static cplx to_std(const cplx_q& z) {
    return {z.real().convert_to<double>(), z.imag().convert_to<double>()};
  }
  static real_t epsilon() {
    return std::numeric_limits<real_t>::epsilon();
  }
};

inline bool is_finite(const cplx& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

/// Univariate polynomial with complex coefficients, lowest degree first.
template <class C = cplx>
class Polynomial {
 public:
  Polynomial() : c_(1, C(0)) {}
  explicit Polynomial(std::vector<C> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_.push_back(C(0));
  }

  const std::vector<C>& coeffs() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }

  /// Drops (numerically) vanishing leading coefficients.
  void normalize(double rel_tol = 1e-14) {
    using CT = cplx_traits<C>;
    typename CT::real_t maxc(0);
    for (const auto& a : c_) maxc = std::max(maxc, CT::abs(a));
    while (c_.size() > 1 && CT::abs(c_.back()) <= CT::from_double(rel_tol) * maxc)
      c_.pop_back();
  }

  C eval(const C& z) const {
    C acc(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return Polynomial();
    std::vector<C> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = C(double(k)) * c_[k];
    return Polynomial(std::move(d));
  }

  Polynomial& operator*=(const Polynomial& o) {
    std::vector<C> r(c_.size() + o.c_.size() - 1, C(0));
    for (std::size_t i = 0; i < c_.size(); ++i)
      for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
    c_ = std::move(r);
    return *this;
  }
  Polynomial& operator+=(const Polynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), C(0));
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), C(0));
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  friend Polynomial operator*(Polynomial a, const Polynomial& b) { return a *= b; }
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }

  /// (z - r) monomial factor.
  static Polynomial root_factor(const C& r) { return Polynomial({-r, C(1)}); }

 private:
  std::vector<C> c_;
};

/// All roots with multiplicity. Aberth-Ehrlich iteration followed by a
/// mandatory Newton polish; the polish sets the accuracy floor for
/// everything downstream.
std::vector<cplx> poly_roots(const Polynomial<cplx>& p);

struct QuadratureOptions {
  int start_nodes = 64;
  int max_nodes = 4096;
  double rel_tol = 1e-11;
  double fail_tol = 1e-8;
};

/// (1/2pii) * closed contour integral of f over |q - center| = radius by the
/// trapezoid rule, doubling the node count until the relative change drops
/// below rel_tol. Geometric convergence for f analytic in an annulus around
/// the circle.
template <class C, class F>
C contour_residue_t(F&& f, const C& center, const typename cplx_traits<C>::real_t& radius,
                    const QuadratureOptions& opt = {}) {
  using CT = cplx_traits<C>;
  using R = typename CT::real_t;
  const R two_pi = R(2) * CT::pi();

  int m = opt.start_nodes;
  std::vector<C> vals;  // f(node) * unit(node), reused across doublings
  vals.reserve(m);
  R fscale(0);
  for (int j = 0; j < m; ++j) {
    R th = two_pi * R(j) / R(m);
    C u = CT::make(CT::cos(th), CT::sin(th));
    C fv = f(center + radius * u);
    fscale = std::max(fscale, CT::abs(fv));
    vals.push_back(fv * u);
  }
  auto sum = [&]() {
    C s(0);
    for (const auto& v : vals) s += v;
    return s * radius / R(double(vals.size()));
  };
  C prev = sum();
  R last_change(0);
  while (m < opt.max_nodes) {
    // interleave new nodes between the existing ones
    std::vector<C> next(2 * m);
    for (int j = 0; j < m; ++j) next[2 * j] = vals[j];
    for (int j = 0; j < m; ++j) {
      R th = two_pi * R(2 * j + 1) / R(2 * m);
      C u = CT::make(CT::cos(th), CT::sin(th));
      C fv = f(center + radius * u);
      fscale = std::max(fscale, CT::abs(fv));
      next[2 * j + 1] = fv * u;
    }
    vals = std::move(next);
    m *= 2;
    C cur = sum();
    R change = CT::abs(cur - prev);
    R noise_floor = fscale * radius * CT::epsilon() * R(64);
    if (change <= CT::from_double(opt.rel_tol) * std::max(CT::abs(cur), noise_floor) ||
        change <= noise_floor)
      return cur;
    prev = cur;
    last_change = change;
  }
  // at the cap: accept only if the final doubling stayed under fail_tol
  R ref = std::max(CT::abs(prev), fscale * radius);
  if (last_change <= CT::from_double(opt.fail_tol) * ref) return prev;
  raise(ErrorCode::NonConvergence,
        "contour_residue: node cap reached without stabilizing");
}

cplx contour_residue(const std::function<cplx(cplx)>& f, cplx center, double radius,
                     const QuadratureOptions& opt = {});

/// Taylor coefficients c_0..c_K of f around 0 from samples on |lambda| =
/// radius (discrete Cauchy integral, M >= 4K nodes). Fixed node count.
template <class C, class F>
std::vector<C> taylor_extract_fixed_t(F&& f, const typename cplx_traits<C>::real_t& radius,
                                      int order, int nodes) {
  using CT = cplx_traits<C>;
  using R = typename CT::real_t;
  const R two_pi = R(2) * CT::pi();
  const int m = nodes;
  std::vector<C> fv(m);
  for (int j = 0; j < m; ++j) {
    R th = two_pi * R(j) / R(m);
    fv[j] = f(radius * CT::make(CT::cos(th), CT::sin(th)));
  }
  std::vector<C> out(order + 1);
  R rk(1);
  for (int k = 0; k <= order; ++k) {
    C s(0);
    for (int j = 0; j < m; ++j) {
      R th = two_pi * R(j) / R(m) * R(double(k));
      s += fv[j] * CT::make(CT::cos(th), -CT::sin(th));
    }
    out[k] = s / (R(double(m)) * rk);
    rk *= radius;
  }
  return out;
}

/// Adaptive variant: doubles the node count once and raises NonConvergence
/// if the coefficients moved by more than the tolerance.
std::vector<cplx> taylor_extract(const std::function<cplx(cplx)>& f, double radius,
                                 int order, double rel_tol = 1e-9);

}  // namespace lsz
