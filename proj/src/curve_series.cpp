#include "lsz/curve_series.hpp"

namespace lsz {

CurveSeries solve_curve_series(const RationalModel& m, int order) {
  const int d = m.d(), dt = m.d_tilde();
  const int K = order;
  const rat inv_n = rat(1) / rat(m.n);

  CurveSeries cs;
  cs.order = K;
  cs.eps.assign(d, RationalSeries(K));
  cs.eps_tilde.assign(dt, RationalSeries(K));
  cs.rho.assign(d, RationalSeries(K));
  cs.rho_tilde.assign(dt, RationalSeries(K));
  for (int n = 0; n < d; ++n) {
    cs.eps[n][0] = m.e[n];
    cs.rho[n][0] = rat(m.r[n]);
  }
  for (int k = 0; k < dt; ++k) {
    cs.eps_tilde[k][0] = -m.e_tilde[k];
    cs.rho_tilde[k][0] = -rat(m.r_tilde[k]);
  }

  // Fixed point of
  //   eps_n   = e_n  - (lam/N) sum_k rho~_k / (eps_n - eps~_k)
  //   eps~_k  = -e~_k + (lam/N) sum_n rho_n  / (eps~_k - eps_n)
  //   rho_n   = r_n  / (1 - (lam/N) sum_k rho~_k / (eps_n - eps~_k)^2)
  //   rho~_k  = r~_k / (-1 - (lam/N) sum_n rho_n / (eps~_k - eps_n)^2)
  // The lambda prefactors make each sweep exact to one more order.
  for (int sweep = 0; sweep <= K; ++sweep) {
    CurveSeries next = cs;
    for (int n = 0; n < d; ++n) {
      RationalSeries acc(K);
      for (int k = 0; k < dt; ++k) {
        RationalSeries diff = cs.eps[n] - cs.eps_tilde[k];
        acc += cs.rho_tilde[k] * diff.inverse();
      }
      next.eps[n] = RationalSeries(K, m.e[n]) - (acc * inv_n).shifted(1);
    }
    for (int k = 0; k < dt; ++k) {
      RationalSeries acc(K);
      for (int n = 0; n < d; ++n) {
        RationalSeries diff = cs.eps_tilde[k] - cs.eps[n];
        acc += cs.rho[n] * diff.inverse();
      }
      next.eps_tilde[k] = RationalSeries(K, -m.e_tilde[k]) + (acc * inv_n).shifted(1);
    }
    for (int n = 0; n < d; ++n) {
      RationalSeries xp(K, rat(1));
      for (int k = 0; k < dt; ++k) {
        RationalSeries diff = cs.eps[n] - cs.eps_tilde[k];
        RationalSeries inv = diff.inverse();
        xp -= (cs.rho_tilde[k] * inv * inv * inv_n).shifted(1);
      }
      next.rho[n] = rat(m.r[n]) * xp.inverse();
    }
    for (int k = 0; k < dt; ++k) {
      RationalSeries yp(K, rat(-1));
      for (int n = 0; n < d; ++n) {
        RationalSeries diff = cs.eps_tilde[k] - cs.eps[n];
        RationalSeries inv = diff.inverse();
        yp -= (cs.rho[n] * inv * inv * inv_n).shifted(1);
      }
      next.rho_tilde[k] = rat(m.r_tilde[k]) * yp.inverse();
    }
    cs = std::move(next);
  }
  return cs;
}

}  // namespace lsz
