#include "lsz/limits.hpp"

#include <atomic>
#include <cmath>
#include <future>
#include <random>
#include <sstream>
#include <thread>

#include "lsz/ramification.hpp"

namespace lsz {

namespace {

bool table_pair(int g, int n) {
  return (g == 0 && (n == 1 || n == 2 || n == 3)) || (g == 1 && (n == 1 || n == 2)) ||
         (g == 2 && n == 1);
}

template <class C>
C comb_value(int g, int n, const C& lam) {
  using CT = cplx_traits<C>;
  using R = typename CT::real_t;
  const R half = CT::from_double(0.5);
  CombCurveT<C> cv(half, half, lam);
  OmegaEngineT<CombCurveT<C>> eng(cv);
  if (g == 0 && n == 1) return eng.omega1_regularized(0);
  if (g == 0 && n == 2) return eng.bergman_diagonal(cv.eps_point(0));
  std::vector<C> pts(n, cv.eps_point(0));
  return eng.omega(g, pts);
}

template <class C>
std::vector<cplx> comb_circle_samples(int g, int n, double radius, int nodes, int threads) {
  using CT = cplx_traits<C>;
  using R = typename CT::real_t;
  const int m = nodes;
  std::vector<cplx> f(m);
  // conjugate symmetry halves the work: f(conj lambda) = conj f(lambda)
  const int upper = m / 2;
  int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, upper + 1));
  std::vector<std::future<void>> futs;
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int j = next.fetch_add(1);
      if (j > upper) return;
      R th = R(2) * CT::pi() * R(j) / R(m);
      C lam = CT::make(CT::from_double(radius) * CT::cos(th), CT::from_double(radius) * CT::sin(th));
      f[j] = CT::to_std(comb_value<C>(g, n, lam));
    }
  };
  for (int t = 0; t < n_threads; ++t) futs.push_back(std::async(std::launch::async, worker));
  for (auto& fu : futs) fu.get();
  for (int j = upper + 1; j < m; ++j) f[j] = std::conj(f[m - j]);
  return f;
}

std::vector<cplx> coefficients(const std::vector<cplx>& f, double radius, int order) {
  const int m = static_cast<int>(f.size());
  std::vector<cplx> c(order + 1);
  for (int k = 0; k <= order; ++k) {
    cplx s = 0;
    for (int j = 0; j < m; ++j) {
      double th = 2.0 * M_PI * j * k / m;
      s += f[j] * cplx(std::cos(th), -std::sin(th));
    }
    c[k] = s / (double(m) * std::pow(radius, k));
  }
  return c;
}

}  // namespace

CombLimitCurve CombLimitCurve::make(double e, double e_tilde, double lambda) {
  const double sum = e + e_tilde;
  const double disc = sum * sum + 12.0 * lambda;
  if (!(disc > 0)) raise(ErrorCode::BranchCut, "comb-limit discriminant is not positive");
  CombLimitCurve c;
  c.e = e;
  c.e_tilde = e_tilde;
  c.lambda = lambda;
  const double s = std::sqrt(disc);
  c.eps = (5.0 * e - e_tilde + s) / 6.0;
  c.eps_tilde = (e - 5.0 * e_tilde - s) / 6.0;
  const double sq1u = s / sum;
  c.rho_over_n = (2.0 / 3.0) * (1.0 + 1.0 / (sq1u + 1.0));
  c.rho_tilde_over_n = -c.rho_over_n;

  ModelSpec spec;
  spec.e = {{e, 1}};
  spec.e_tilde = {{e_tilde, 1}};
  spec.lambda = lambda;
  spec.n = 1;
  SpectralCurve solved = solve_curve(spec);
  double mismatch = std::abs(solved.eps[0] - c.eps);
  mismatch = std::max(mismatch, std::abs(solved.eps_tilde[0] - c.eps_tilde));
  mismatch = std::max(mismatch, std::abs(solved.rho[0] - c.rho_over_n));
  mismatch = std::max(mismatch, std::abs(solved.rho_tilde[0] - c.rho_tilde_over_n));
  if (mismatch > 1e-10 * std::max(1.0, std::abs(sum)))
    raise(ErrorCode::NonConvergence, "closed-form comb curve disagrees with the numeric solve");
  return c;
}

std::vector<MapCountRow> map_counts(int g, int n, int max_order, const MapCountOptions& opt) {
  if (!table_pair(g, n))
    raise(ErrorCode::InvalidArgument, "map_counts: (g,n) outside the tabulated family");
  if (max_order > 5) raise(ErrorCode::InvalidArgument, "map_counts: max_order capped at 5");

  double radius = opt.radius;
  for (int attempt = 0; attempt <= opt.max_radius_doublings; ++attempt) {
    std::vector<cplx> samples =
        (opt.precision_bits > 64)
            ? comb_circle_samples<cplx_q>(g, n, radius, opt.nodes, opt.threads)
            : comb_circle_samples<cplx>(g, n, radius, opt.nodes, opt.threads);
    std::vector<cplx> c = coefficients(samples, radius, max_order);
    std::vector<MapCountRow> rows;
    bool guard_ok = true;
    for (int k = 0; k <= max_order; ++k) {
      cplx m_k = (k % 2 == 0 ? 1.0 : -1.0) * c[k];
      double rounded = std::round(m_k.real());
      double err = std::abs(m_k - cplx(rounded, 0.0));
      if (err >= 1e-3 * std::max(1.0, std::abs(m_k))) {
        guard_ok = false;
        break;
      }
      rows.push_back({g, n, k, static_cast<long long>(rounded), m_k.real(), err});
    }
    if (guard_ok) return rows;
    radius *= 2.0;  // escalate: larger circle tames the k-th root noise amplification
  }
  raise(ErrorCode::RoundingGuard, "map_counts: coefficients failed the integer rounding guard");
}

std::string map_counts_csv(const std::vector<MapCountRow>& rows) {
  std::ostringstream os;
  os << "g,n,order,count,raw,abs_error\n";
  os.precision(17);
  for (const auto& r : rows)
    os << r.g << "," << r.n << "," << r.order << "," << r.count << "," << r.raw << ","
       << r.abs_error << "\n";
  return os.str();
}

double tutte_number(int n) {
  // 2 * 3^n (2n)! / (n! (n+2)!)
  double v = 2.0;
  for (int i = 0; i < n; ++i) v *= 3.0;
  for (int i = n + 1; i <= 2 * n; ++i) v *= i;  // (2n)!/n!
  for (int i = 2; i <= n + 2; ++i) v /= i;      // (n+2)!
  return v;
}

std::vector<TutteRow> tutte_check(int max_order, const MapCountOptions& opt) {
  if (max_order > 4) raise(ErrorCode::InvalidArgument, "tutte_check: max_order capped at 4");
  const double radius = opt.radius;
  const int m = opt.nodes;
  std::vector<cplx> f(m);
  for (int j = 0; j < m; ++j) {
    double th = 2.0 * M_PI * j / m;
    cplx lam = radius * cplx(std::cos(th), std::sin(th));
    CombCurveT<cplx> cv(0.5, 0.5, lam);
    // G(eps, eps~) through the double pole limit: -(e~ - y(sigma(eps)))/lambda
    cplx val = (cv.y(cv.sigma(0, cv.eps_point(0))) - 0.5) / lam;
    f[j] = val;
  }
  std::vector<cplx> c = coefficients(f, radius, max_order);
  std::vector<TutteRow> rows;
  for (int k = 0; k <= max_order; ++k) {
    double computed = ((k % 2 == 0) ? 1.0 : -1.0) * c[k].real();
    double expected = tutte_number(k);
    rows.push_back({k, computed, expected, std::abs(computed - expected) / expected});
  }
  return rows;
}

double lsz_tilde_zero_check(const ModelSpec& spec, int grid_points, unsigned long long seed,
                            OneCutData* out_data) {
  if (spec.d_tilde() != 1)
    raise(ErrorCode::InvalidArgument, "lsz_tilde_zero_check: needs d~ = 1");
  if (spec.e_tilde[0].value != 0.0)
    raise(ErrorCode::InvalidArgument, "lsz_tilde_zero_check: needs e~ = 0");
  SpectralCurve cv = solve_curve(spec);
  const cplx epst = cv.eps_tilde[0];
  const cplx c = cv.lambda / double(spec.n) * cv.rho_tilde[0];
  const cplx root = 2.0 * std::sqrt(c);
  OneCutData data{epst + root, epst - root};
  if (out_data) *out_data = data;

  // branch self-check: x'(z)^2 (z - eps~)^2 == (x-b1)(x-b2)
  auto sqrt_prod = [&](cplx z) { return cv.x_prime(z) * (z - epst); };
  {
    cplx z0 = cv.scale * cplx(1.7, 0.9);
    cplx xv = cv.x(z0);
    cplx lhs = sqrt_prod(z0) * sqrt_prod(z0);
    cplx rhs = (xv - data.b1) * (xv - data.b2);
    if (std::abs(lhs - rhs) > 1e-8 * std::max(1.0, std::abs(rhs)))
      raise(ErrorCode::BranchChoice, "one-cut square-root branch matching failed");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double emax = 0;
  for (const auto& ev : cv.spec.e) emax = std::max(emax, ev.value);

  double residual = 0;
  for (int i = 0; i < grid_points; ++i) {
    double z = emax + 0.5 + 3.0 * unif(rng);
    cplx xv = cv.x(z);
    // pole-cancelled Omega_1 at generic z
    cplx direct = (z - xv) / cv.lambda;
    for (int n = 0; n < cv.d(); ++n) {
      direct += cv.weight(n) *
                (1.0 / (xv - cv.e(n)) - 1.0 / (cv.x_prime(cv.eps[n]) * (z - cv.eps[n])));
    }
    // one-cut closed form with the branch sqrt((x-b1)(x-b2)) := x'(z)(z - eps~)
    cplx S = sqrt_prod(z);
    cplx closed = (S - xv) / (2.0 * cv.lambda);
    for (int n = 0; n < cv.d(); ++n) {
      cplx s_n = cv.x_prime(cv.eps[n]) * (cv.eps[n] - epst);
      closed += 0.5 * cv.weight(n) * (1.0 / (xv - cv.e(n)) - S / ((xv - cv.e(n)) * s_n));
    }
    residual = std::max(residual, std::abs(direct - closed));
  }
  return residual;
}

}  // namespace lsz
