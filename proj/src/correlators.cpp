#include "lsz/correlators.hpp"

#include <algorithm>
#include <cmath>

namespace lsz {

namespace {

std::vector<cplx> cat(cplx a, const std::vector<cplx>& rest) {
  std::vector<cplx> v;
  v.reserve(rest.size() + 1);
  v.push_back(a);
  v.insert(v.end(), rest.begin(), rest.end());
  return v;
}

std::vector<std::int64_t> quantize_list(const std::vector<cplx>& pts, bool sort_pairs) {
  std::vector<std::pair<std::int64_t, std::int64_t>> q;
  q.reserve(pts.size());
  for (const auto& p : pts)
    q.push_back({std::llround(p.real() / 1e-12), std::llround(p.imag() / 1e-12)});
  if (sort_pairs) std::sort(q.begin(), q.end());
  std::vector<std::int64_t> flat;
  flat.reserve(2 * q.size());
  for (auto& [a, b] : q) {
    flat.push_back(a);
    flat.push_back(b);
  }
  return flat;
}

}  // namespace

CorrelatorKey canonical(const CorrelatorKey& key) {
  CorrelatorKey out = key;
  std::sort(out.deriv.begin(), out.deriv.end());
  for (auto& b : out.boundaries) {
    if (b.empty()) raise(ErrorCode::InvalidArgument, "empty boundary cycle");
    auto best = b;
    for (std::size_t r = 1; r < b.size(); ++r) {
      std::rotate(b.begin(), b.begin() + 1, b.end());
      if (b < best) best = b;
    }
    b = best;
  }
  // longer boundaries first, then lexicographic; reduction order is fixed by
  // this canonical layout for cache determinism
  std::sort(out.boundaries.begin(), out.boundaries.end(),
            [](const auto& a, const auto& b) {
              if (a.size() != b.size()) return a.size() > b.size();
              return a < b;
            });
  return out;
}

cplx lagrange_interpolate(const std::vector<cplx>& nodes, const std::vector<cplx>& values,
                          cplx x) {
  if (nodes.size() != values.size() || nodes.empty())
    raise(ErrorCode::InvalidArgument, "lagrange_interpolate: bad node/value lists");
  cplx acc = 0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    cplx term = values[j];
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (i == j) continue;
      term *= (x - nodes[i]) / (nodes[j] - nodes[i]);
    }
    acc += term;
  }
  return acc;
}

CorrelatorEngine::CorrelatorEngine(const SpectralCurve& cv, const RamificationData& ram,
                                   OmegaEvaluator& om, CorrelatorOptions opt)
    : cv_(cv), ram_(ram), om_(om), opt_(opt) {}

cplx CorrelatorEngine::planar_two_point(cplx z, cplx w) const {
  if (std::abs(cv_.lambda) < kMinFiberLambda) {
    return 1.0 / (cv_.y(w) - cv_.y(z));  // free theory
  }
  const double snap = 1e-9 * cv_.scale;
  // w at a pole of x (an eps~ point): the product (x(z)-x(w))(y(w)-e~_l)
  // tends to -lambda r~_l / N, leaving a finite limit.
  for (int l = 0; l < cv_.d_tilde(); ++l) {
    if (std::abs(w - cv_.eps_tilde[l]) < snap) {
      cplx prod = 1;
      for (const auto& zh : preimages_x(cv_, z)) prod *= cv_.e_tilde(l) - cv_.y(zh);
      for (int k = 0; k < cv_.d_tilde(); ++k)
        if (k != l) prod /= cv_.e_tilde(l) - cv_.e_tilde(k);
      return -prod / (cv_.lambda * cv_.weight_tilde(l));
    }
  }
  // z at a pole of y (an eps point): mirrored limit through the x-fiber form.
  for (int p = 0; p < cv_.d(); ++p) {
    if (std::abs(z - cv_.eps[p]) < snap) {
      cplx prod = 1;
      for (const auto& wh : preimages_y(cv_, w)) prod *= cv_.e(p) - cv_.x(wh);
      for (int n = 0; n < cv_.d(); ++n)
        if (n != p) prod /= cv_.e(p) - cv_.e(n);
      return -prod / (cv_.lambda * cv_.weight(p));
    }
  }
  // y-fiber product form: G = prod_k (y(w)-y(zhat^k))/(y(w)-e~_k) / (x(z)-x(w))
  const cplx yw = cv_.y(w);
  cplx val_a;
  {
    cplx prod = 1;
    for (const auto& zh : preimages_x(cv_, z)) prod *= yw - cv_.y(zh);
    for (int k = 0; k < cv_.d_tilde(); ++k) prod /= yw - cv_.e_tilde(k);
    val_a = prod / (cv_.x(z) - cv_.x(w));
  }
  // x-fiber product form: G = prod_n (x(z)-x(what^n))/(x(z)-e_n) / (y(w)-y(z))
  const cplx xz = cv_.x(z);
  cplx val_b;
  {
    cplx prod = 1;
    for (const auto& wh : preimages_y(cv_, w)) prod *= xz - cv_.x(wh);
    for (int n = 0; n < cv_.d(); ++n) prod /= xz - cv_.e(n);
    val_b = prod / (yw - cv_.y(z));
  }
  double mag = std::max(std::abs(val_a), std::abs(val_b));
  if (std::abs(val_a - val_b) > 1e-6 * std::max(mag, 1e-30))
    raise(ErrorCode::IllConditioned, "two-point product representations disagree");
  // prefer the representation with the better-separated outer denominator
  return (std::abs(cv_.x(z) - cv_.x(w)) >= std::abs(yw - cv_.y(z))) ? val_a : val_b;
}

double CorrelatorEngine::two_point_dse_residual(cplx z, cplx w) const {
  cplx lhs = (cv_.y(w) - cv_.y(z)) * planar_two_point(z, w);
  cplx rhs = 1;
  for (int k = 0; k < cv_.d(); ++k) {
    rhs += cv_.lambda * cv_.weight(k) * planar_two_point(cv_.eps[k], w) /
           (cv_.e(k) - cv_.x(z));
  }
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

double CorrelatorEngine::pole_decomposition_check(cplx z, cplx u) const {
  const cplx lhs = planar_two_point(z, u);
  cplx sum = 1;
  if (std::abs(cv_.lambda) >= kMinFiberLambda) {
    for (int k = 0; k < cv_.d(); ++k) {
      std::vector<cplx> ehat = preimages_x(cv_, cv_.eps[k]);
      for (int l = 0; l < cv_.d_tilde(); ++l) {
        std::vector<cplx> ethat = preimages_y(cv_, cv_.eps_tilde[l]);
        const cplx g_kl = planar_two_point(cv_.eps[k], cv_.eps_tilde[l]);
        for (std::size_t m = 0; m < ehat.size(); ++m) {
          for (std::size_t n2 = 0; n2 < ethat.size(); ++n2) {
            // double residue of (z-u) G(z,u) in the corrected sign convention
            cplx c = (ehat[m] - ethat[n2]) * double(cv_.spec.e[k].mult) *
                     double(cv_.spec.e_tilde[l].mult) * g_kl;
            c /= cv_.x_prime(ehat[m]) * cv_.y_prime(ethat[n2]) *
                 (cv_.e_tilde(l) - cv_.y(ehat[m])) * (cv_.e(k) - cv_.x(ethat[n2]));
            sum += (cv_.lambda * cv_.lambda / double(cv_.spec.n * cv_.spec.n)) * c /
                   ((z - ehat[m]) * (u - ethat[n2]));
          }
        }
      }
    }
  }
  // prefactor 1/(z-u): the decomposition inherits the corrected sign of the
  // two-point assembly
  cplx rhs = sum / (z - u);
  return std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));
}

cplx CorrelatorEngine::x_inverse_near(cplx x_target, cplx start) const {
  cplx v = start;
  for (int it = 0; it < 80; ++it) {
    cplx f = cv_.x(v) - x_target;
    cplx df = cv_.x_prime(v);
    if (std::abs(df) == 0.0) break;
    cplx step = f / df;
    v -= step;
    if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(v))) break;
  }
  if (std::abs(cv_.x(v) - x_target) > 1e-10 * cv_.scale)
    raise(ErrorCode::NonConvergence, "x-inverse continuation failed");
  return v;
}

cplx CorrelatorEngine::y_inverse_near(cplx y_target, cplx start) const {
  cplx v = start;
  for (int it = 0; it < 80; ++it) {
    cplx f = cv_.y(v) - y_target;
    cplx df = cv_.y_prime(v);
    if (std::abs(df) == 0.0) break;
    cplx step = f / df;
    v -= step;
    if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(v))) break;
  }
  if (std::abs(cv_.y(v) - y_target) > 1e-10 * cv_.scale)
    raise(ErrorCode::NonConvergence, "y-inverse continuation failed");
  return v;
}

cplx CorrelatorEngine::generalized_T(int g, const std::vector<cplx>& I, cplx z, cplx w,
                                     const std::vector<Boundary>& J) {
  for (const auto& b : J)
    if (b.size() != 2)
      raise(ErrorCode::InvalidArgument, "generalized_T: all passive boundaries must be length 2");
  return t_resform(g, I, z, w, J, 0);
}

cplx CorrelatorEngine::correlator(int g, const std::vector<cplx>& I,
                                  const std::vector<Boundary>& boundaries) {
  return correlator_impl(g, I, boundaries, 0);
}

cplx CorrelatorEngine::correlator_impl(int g, const std::vector<cplx>& I,
                                       std::vector<Boundary> bs, int depth) {
  if (depth > opt_.max_depth)
    raise(ErrorCode::DepthExceeded, "correlator recursion exceeded its depth budget");
  if (g < 0) return 0;
  if (bs.empty()) raise(ErrorCode::InvalidArgument, "correlator: need at least one boundary");
  for (auto& b : bs)
    if (b.empty() || b.size() % 2 != 0)
      raise(ErrorCode::InvalidArgument, "correlator: boundary lengths must be even and positive");

  // memo on the exact argument layout
  std::vector<cplx> flat;
  flat.insert(flat.end(), I.begin(), I.end());
  std::vector<cplx> bflat;
  for (const auto& b : bs) {
    bflat.push_back(cplx(double(b.size()), 0.0));
    bflat.insert(bflat.end(), b.begin(), b.end());
  }
  TKey key{quantize_list(cat(cplx(g, 0), flat), false), quantize_list(bflat, false)};
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;

  cplx val;
  auto longer = std::find_if(bs.begin(), bs.end(), [](const Boundary& b) { return b.size() > 2; });
  if (longer != bs.end()) {
    std::rotate(bs.begin(), longer, longer + 1);
    val = reduce_boundary(g, I, std::move(bs), depth);
  } else {
    std::vector<Boundary> J(bs.begin() + 1, bs.end());
    val = t_resform(g, I, bs[0][0], bs[0][1], J, depth);
  }
  memo_.emplace(std::move(key), val);
  return val;
}

// Splitting/merging recursion for the first boundary (length >= 4).
cplx CorrelatorEngine::reduce_boundary(int g, const std::vector<cplx>& I,
                                       std::vector<Boundary> bs, int depth) {
  const Boundary b1 = bs[0];
  const std::vector<Boundary> J(bs.begin() + 1, bs.end());
  const int n1 = static_cast<int>(b1.size()) / 2;
  auto zeta = [&](int i) { return b1[2 * (i - 1)]; };      // 1-based
  auto omga = [&](int i) { return b1[2 * (i - 1) + 1]; };

  const cplx denom0 = cv_.y(omga(1)) - cv_.y(omga(n1));
  if (std::abs(denom0) < 1e-9 * cv_.scale)
    raise(ErrorCode::CoincidingIndices,
          "boundary reduction denominator y(w_1)-y(w_N) vanishes");
  const cplx pref = -cv_.lambda / denom0;

  auto slice_a = [&](int k) {  // [zeta_k, w_1, zeta_2, w_2, ..., zeta_{k-1}, w_{k-1}]
    Boundary b{zeta(k), omga(1)};
    for (int i = 2; i <= k - 1; ++i) {
      b.push_back(zeta(i));
      b.push_back(omga(i));
    }
    return b;
  };
  auto slice_b = [&](int k) {  // [zeta_1, w_k, zeta_{k+1}, ..., w_{N1}]
    Boundary b{zeta(1), omga(k)};
    for (int i = k + 1; i <= n1; ++i) {
      b.push_back(zeta(i));
      b.push_back(omga(i));
    }
    return b;
  };
  auto slice_c = [&](int k) {  // [zeta_1, w_1, ..., w_{k-1}]
    Boundary b;
    for (int i = 1; i <= k - 1; ++i) {
      b.push_back(zeta(i));
      b.push_back(omga(i));
    }
    return b;
  };
  auto slice_d = [&](int k) {  // [zeta_k, w_k, ..., w_{N1}]
    Boundary b;
    for (int i = k; i <= n1; ++i) {
      b.push_back(zeta(i));
      b.push_back(omga(i));
    }
    return b;
  };

  cplx acc = 0;
  const int nJ = static_cast<int>(J.size());
  const int m = static_cast<int>(I.size());

  for (int k = 2; k <= n1; ++k) {
    const cplx denom = cv_.x(zeta(k)) - cv_.x(zeta(1));
    if (std::abs(denom) < 1e-9 * cv_.scale)
      raise(ErrorCode::CoincidingIndices,
            "boundary reduction denominator x(z_k)-x(z_1) vanishes");
    // genus-lowering split
    if (g >= 1) {
      std::vector<Boundary> ba{slice_a(k), slice_b(k)};
      ba.insert(ba.end(), J.begin(), J.end());
      std::vector<Boundary> bc{slice_c(k), slice_d(k)};
      bc.insert(bc.end(), J.begin(), J.end());
      acc += (correlator_impl(g - 1, I, std::move(ba), depth + 1) -
              correlator_impl(g - 1, I, std::move(bc), depth + 1)) /
             denom;
    }
    // factorized splits
    for (int maskI = 0; maskI < (1 << m); ++maskI) {
      std::vector<cplx> i1, i2;
      for (int i = 0; i < m; ++i) ((maskI >> i) & 1 ? i1 : i2).push_back(I[i]);
      for (int maskJ = 0; maskJ < (1 << nJ); ++maskJ) {
        std::vector<Boundary> j1, j2;
        for (int s = 0; s < nJ; ++s) ((maskJ >> s) & 1 ? j1 : j2).push_back(J[s]);
        for (int h = 0; h <= g; ++h) {
          std::vector<Boundary> left1{slice_a(k)};
          left1.insert(left1.end(), j1.begin(), j1.end());
          std::vector<Boundary> right1{slice_b(k)};
          right1.insert(right1.end(), j2.begin(), j2.end());
          cplx t1 = correlator_impl(h, i1, std::move(left1), depth + 1) *
                    correlator_impl(g - h, i2, std::move(right1), depth + 1);
          std::vector<Boundary> left2{slice_c(k)};
          left2.insert(left2.end(), j1.begin(), j1.end());
          std::vector<Boundary> right2{slice_d(k)};
          right2.insert(right2.end(), j2.begin(), j2.end());
          cplx t2 = correlator_impl(h, i1, std::move(left2), depth + 1) *
                    correlator_impl(g - h, i2, std::move(right2), depth + 1);
          acc += (t1 - t2) / denom;
        }
      }
    }
  }

  // merges with the passive boundaries
  for (int s = 0; s < nJ; ++s) {
    const Boundary& bb = J[s];
    const int nb = static_cast<int>(bb.size()) / 2;
    auto zb = [&](int i) { return bb[2 * (i - 1)]; };
    auto wb = [&](int i) { return bb[2 * (i - 1) + 1]; };
    std::vector<Boundary> rest;
    for (int t = 0; t < nJ; ++t)
      if (t != s) rest.push_back(J[t]);
    for (int k = 1; k <= nb; ++k) {
      const cplx denom = cv_.x(zb(k)) - cv_.x(zeta(1));
      if (std::abs(denom) < 1e-9 * cv_.scale)
        raise(ErrorCode::CoincidingIndices,
              "boundary merge denominator x(z^b_k)-x(z_1) vanishes");
      // A: [zb_1, wb_1, .., zb_k,  w_1, zeta_2, .., w_{N1},  zeta_1,  wb_k, .., wb_nb]
      Boundary A;
      for (int i = 1; i <= k - 1; ++i) {
        A.push_back(zb(i));
        A.push_back(wb(i));
      }
      A.push_back(zb(k));
      A.push_back(omga(1));
      for (int i = 2; i <= n1; ++i) {
        A.push_back(zeta(i));
        A.push_back(omga(i));
      }
      A.push_back(zeta(1));
      A.push_back(wb(k));
      for (int i = k + 1; i <= nb; ++i) {
        A.push_back(zb(i));
        A.push_back(wb(i));
      }
      // B: [zb_1, .., wb_{k-1},  zeta_1, w_1, .., w_{N1},  zb_k, .., wb_nb]
      Boundary B;
      for (int i = 1; i <= k - 1; ++i) {
        B.push_back(zb(i));
        B.push_back(wb(i));
      }
      for (int i = 1; i <= n1; ++i) {
        B.push_back(zeta(i));
        B.push_back(omga(i));
      }
      for (int i = k; i <= nb; ++i) {
        B.push_back(zb(i));
        B.push_back(wb(i));
      }
      std::vector<Boundary> withA{A};
      withA.insert(withA.end(), rest.begin(), rest.end());
      std::vector<Boundary> withB{B};
      withB.insert(withB.end(), rest.begin(), rest.end());
      acc += (correlator_impl(g, I, std::move(withA), depth + 1) -
              correlator_impl(g, I, std::move(withB), depth + 1)) /
             denom;
    }
  }
  return pref * acc;
}

cplx CorrelatorEngine::bracket(int g, const std::vector<cplx>& I, cplx t, cplx w,
                               const std::vector<Boundary>& J, int depth) {
  const int m = static_cast<int>(I.size());
  const int nJ = static_cast<int>(J.size());
  cplx val = 0;
  for (int maskI = 0; maskI < (1 << m); ++maskI) {
    std::vector<cplx> i1, i2;
    for (int i = 0; i < m; ++i) ((maskI >> i) & 1 ? i1 : i2).push_back(I[i]);
    for (int maskJ = 0; maskJ < (1 << nJ); ++maskJ) {
      std::vector<Boundary> j1, j2;
      for (int s = 0; s < nJ; ++s) ((maskJ >> s) & 1 ? j1 : j2).push_back(J[s]);
      for (int g1 = 0; g1 <= g; ++g1) {
        if (g1 == 0 && i1.empty() && j1.empty()) continue;  // primed sum
        cplx factor1;
        if (j1.empty()) {
          factor1 = om_.omega(g1, cat(t, i1));  // boundary-free piece is an Omega
        } else {
          factor1 = correlator_impl(g1, cat(t, i1), j1, depth + 1);
        }
        cplx factor2 = t_resform(g - g1, i2, t, w, j2, depth + 1);
        val += factor1 * factor2;
      }
    }
  }
  if (g >= 1) val += t_resform(g - 1, cat(t, I), t, w, J, depth + 1);
  for (int s = 0; s < nJ; ++s) {
    Boundary merged{t, J[s][1], J[s][0], w};
    std::vector<Boundary> rest;
    for (int tt = 0; tt < nJ; ++tt)
      if (tt != s) rest.push_back(J[tt]);
    std::vector<Boundary> withMerged{merged};
    withMerged.insert(withMerged.end(), rest.begin(), rest.end());
    val += correlator_impl(g, I, std::move(withMerged), depth + 1) / (cv_.x(J[s][0]) - cv_.x(t));
  }
  return val;
}

// Residue formula for T^{(g)}(I || z,w | J), all passive boundaries length 2.
cplx CorrelatorEngine::t_resform(int g, std::vector<cplx> I, cplx z, cplx w,
                                 std::vector<Boundary> J, int depth) {
  if (depth > opt_.max_depth)
    raise(ErrorCode::DepthExceeded, "T recursion exceeded its depth budget");
  if (g < 0) return 0;
  if (g == 0 && I.empty() && J.empty()) return planar_two_point(z, w);

  // memo
  std::vector<cplx> flat = cat(cplx(g, 0), I);
  flat.push_back(z);
  flat.push_back(w);
  std::vector<cplx> bflat;
  for (const auto& b : J) bflat.insert(bflat.end(), b.begin(), b.end());
  TKey key{quantize_list(flat, false), quantize_list(bflat, false)};
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;

  const cplx g0_zw = planar_two_point(z, w);

  // residue targets: z, y-fiber of w, derivative markers, passive z^s
  std::vector<cplx> targets{z};
  std::vector<cplx> wfiber = preimages_y(cv_, w);
  targets.insert(targets.end(), wfiber.begin(), wfiber.end());
  targets.insert(targets.end(), I.begin(), I.end());
  for (const auto& b : J) targets.push_back(b[0]);

  // dedupe exactly coinciding targets; near-coincidences are an error
  std::vector<cplx> uniq;
  for (const auto& t : targets) {
    bool dup = false;
    for (const auto& u : uniq) {
      double d = std::abs(t - u);
      if (d <= 1e-11 * cv_.scale) {
        dup = true;
        break;
      }
      if (d < 1e-7 * cv_.scale)
        raise(ErrorCode::CoincidingIndices, "near-coincident residue targets in T formula");
    }
    if (!dup) uniq.push_back(t);
  }

  // singular set the contours must avoid: the kernel also has poles at the
  // unlisted x-fiber partners of z and at the zeros of G0(., w) (the x-fiber
  // partners of the y-fiber points).
  std::vector<cplx> avoid = uniq;
  avoid.push_back(w);
  for (const auto& b : ram_.betas) avoid.push_back(b);
  for (const auto& p : cv_.eps) avoid.push_back(p);
  for (const auto& p : cv_.eps_tilde) avoid.push_back(p);
  for (const auto& partner : preimages_x(cv_, z)) avoid.push_back(partner);
  for (const auto& wf : wfiber)
    for (const auto& partner : preimages_x(cv_, wf)) avoid.push_back(partner);

  auto integrand = [&](cplx t) {
    cplx ker = cv_.lambda * g0_zw * cv_.x_prime(t) /
               ((cv_.x(z) - cv_.x(t)) * (cv_.y(w) - cv_.y(t)) * planar_two_point(t, w));
    return ker * bracket(g, I, t, w, J, depth);
  };

  cplx total = 0;
  for (const auto& t0 : uniq) {
    double dist = 1e300;
    for (const auto& a : avoid) {
      double d = std::abs(t0 - a);
      if (d > 1e-11 * cv_.scale) dist = std::min(dist, d);
    }
    double rad = 0.25 * std::min(dist, cv_.scale);
    if (rad < 1e-8 * cv_.scale)
      raise(ErrorCode::CoincidingIndices, "residue contour collapsed in T formula");
    total += contour_residue(integrand, t0, rad);
  }
  memo_.emplace(std::move(key), total);
  return total;
}

cplx CorrelatorEngine::full_correlator(const CorrelatorKey& key_in) {
  CorrelatorKey key = canonical(key_in);
  const int d = cv_.d(), dt = cv_.d_tilde();
  for (int i : key.deriv)
    if (i < 0 || i >= d) raise(ErrorCode::InvalidArgument, "derivative index out of range");
  std::vector<int> e_count(d, 0), et_count(dt, 0);
  for (const auto& b : key.boundaries)
    for (const auto& [p, q] : b) {
      if (p < 0 || p >= d || q < 0 || q >= dt)
        raise(ErrorCode::InvalidArgument, "boundary index out of range");
      ++e_count[p];
      ++et_count[q];
    }
  bool coincides = false;
  for (int c : e_count) coincides |= (c > 1);
  for (int c : et_count) coincides |= (c > 1);

  std::vector<cplx> I;
  for (int i : key.deriv) I.push_back(cv_.eps[i]);

  if (!coincides) {
    std::vector<Boundary> bs;
    for (const auto& b : key.boundaries) {
      Boundary pts;
      for (const auto& [p, q] : b) {
        pts.push_back(cv_.eps[p]);
        pts.push_back(cv_.eps_tilde[q]);
      }
      bs.push_back(std::move(pts));
    }
    return correlator_impl(key.g, I, bs, 0);
  }
  if (!opt_.coinciding_limit_mode)
    raise(ErrorCode::CoincidingIndices,
          "repeated eigenvalue indices in boundaries; enable the limit mode");

  // Perturb repeated occurrences along the analytic continuation and
  // extrapolate h -> 0 through Lagrange interpolation in h^2 (the +/-h
  // average kills the odd orders).
  auto eval_at = [&](double h) {
    std::vector<int> e_seen(d, 0), et_seen(dt, 0);
    std::vector<Boundary> bs;
    for (const auto& b : key.boundaries) {
      Boundary pts;
      for (const auto& [p, q] : b) {
        int me = e_seen[p]++;
        int mq = et_seen[q]++;
        cplx zp = (me == 0) ? cv_.eps[p]
                            : x_inverse_near(cv_.e(p) + double(me) * h, cv_.eps[p]);
        cplx wq = (mq == 0) ? cv_.eps_tilde[q]
                            : y_inverse_near(cv_.e_tilde(q) + double(mq) * h, cv_.eps_tilde[q]);
        pts.push_back(zp);
        pts.push_back(wq);
      }
      bs.push_back(std::move(pts));
    }
    return correlator_impl(key.g, I, bs, 0);
  };
  const double h = opt_.limit_h * cv_.scale;
  cplx f1 = 0.5 * (eval_at(h) + eval_at(-h));
  cplx f2 = 0.5 * (eval_at(h / 2) + eval_at(-h / 2));
  return lagrange_interpolate({cplx(h * h, 0), cplx(h * h / 4, 0)}, {f1, f2}, cplx(0, 0));
}

namespace {

// Set partitions of {0,..,n-1}; parts listed in discovery order.
void set_partitions(int n, std::vector<std::vector<std::vector<int>>>& out) {
  out.clear();
  std::vector<std::vector<int>> current;
  std::function<void(int)> rec = [&](int i) {
    if (i == n) {
      out.push_back(current);
      return;
    }
    for (auto& part : current) {
      part.push_back(i);
      rec(i + 1);
      part.pop_back();
    }
    current.push_back({i});
    rec(i + 1);
    current.pop_back();
  };
  rec(0);
}

// E^{(k)}Omega_{g,n}(t; I): sum over set partitions of t, assignments of I
// to parts, and genus compositions h_1+..+h_l = g + l - k.
cplx e_omega(OmegaEvaluator& om, int g, const std::vector<cplx>& tset,
             const std::vector<cplx>& I) {
  const int k = static_cast<int>(tset.size());
  if (k == 0) return (g == 0 && I.empty()) ? cplx(1, 0) : cplx(0, 0);
  std::vector<std::vector<std::vector<int>>> partitions;
  set_partitions(k, partitions);
  cplx total = 0;
  for (const auto& mu : partitions) {
    const int l = static_cast<int>(mu.size());
    const int hsum = g + l - k;
    if (hsum < 0) continue;
    // assignments of I elements to the l parts
    const int m = static_cast<int>(I.size());
    std::vector<int> assign(m, 0);
    while (true) {
      // genus compositions
      std::vector<int> h(l, 0);
      std::function<cplx(int, int)> comp = [&](int idx, int remaining) -> cplx {
        if (idx == l - 1) {
          h[idx] = remaining;
          cplx prod = 1;
          for (int j = 0; j < l; ++j) {
            std::vector<cplx> pts;
            for (int tIdx : mu[j]) pts.push_back(tset[tIdx]);
            for (int i = 0; i < m; ++i)
              if (assign[i] == j) pts.push_back(I[i]);
            prod *= om.omega(h[j], pts);
          }
          return prod;
        }
        cplx acc = 0;
        for (int take = 0; take <= remaining; ++take) {
          h[idx] = take;
          acc += comp(idx + 1, remaining - take);
        }
        return acc;
      };
      total += comp(0, hsum);
      // next assignment
      int i = 0;
      for (; i < m; ++i) {
        if (++assign[i] < l) break;
        assign[i] = 0;
      }
      if (m == 0 || i == m) break;
    }
  }
  return total;
}

}  // namespace

HPResidual check_H_P(CorrelatorEngine& eng, int g, const std::vector<cplx>& I, cplx z, cplx v) {
  const SpectralCurve& cv = eng.curve();
  OmegaEvaluator& om = eng.omega_evaluator();
  const int dt = cv.d_tilde();
  const int nI = static_cast<int>(I.size());
  const cplx lam = cv.lambda;

  // H from the T-correlator sums
  cplx H = (nI == 0 && g == 0) ? cplx(-1, 0) : cplx(0, 0);
  for (int k = 0; k < dt; ++k) {
    cplx tval = eng.generalized_T(g, I, z, cv.eps_tilde[k], {});
    H += lam * cv.weight_tilde(k) * tval / (v - cv.e_tilde(k));
  }

  // P from its definition
  cplx P = 0;
  if (nI == 0 && g == 0) P += cv.vtilde_prime(v) + cv.v_prime(cv.x(z));
  for (int k = 0; k < dt; ++k) {
    for (int n = 0; n < cv.d(); ++n) {
      cplx tval = eng.generalized_T(g, I, cv.eps[n], cv.eps_tilde[k], {});
      P += lam * lam * cv.weight_tilde(k) * cv.weight(n) * tval /
           ((v - cv.e_tilde(k)) * (cv.x(z) - cv.e(n)));
    }
  }
  for (int i = 0; i < nI; ++i) {
    // -d/dx(z_i) [ lambda^2 sum_k w~_k T(I\z_i || z_i, eps~_k) / ((v-e~_k)(x - x(z_i))) ]
    std::vector<cplx> rest;
    for (int j = 0; j < nI; ++j)
      if (j != i) rest.push_back(I[j]);
    const cplx zi = I[i];
    // clearance of the derivative circle from the curve's singular points
    double clr = 0.3 * cv.scale;
    for (const auto& b : eng.omega_evaluator().view().ramification().betas)
      clr = std::min(clr, std::abs(zi - b));
    for (const auto& p : cv.eps) clr = std::min(clr, std::abs(zi - p));
    for (const auto& p : cv.eps_tilde) clr = std::min(clr, std::abs(zi - p));
    clr = std::min(clr, std::abs(zi - z));
    const double rad = 0.15 * clr;
    cplx tsum = 0, dtsum = 0;
    for (int k = 0; k < dt; ++k) {
      const cplx wt = cv.weight_tilde(k);
      tsum += wt * eng.generalized_T(g, rest, zi, cv.eps_tilde[k], {}) / (v - cv.e_tilde(k));
      // derivative in the boundary slot by a small Cauchy circle
      cplx acc = 0;
      const int mNodes = 16;
      for (int jn = 0; jn < mNodes; ++jn) {
        double th = 2.0 * M_PI * jn / mNodes;
        cplx u(std::cos(th), std::sin(th));
        acc += eng.generalized_T(g, rest, zi + rad * u, cv.eps_tilde[k], {}) / u;
      }
      dtsum += wt * (acc / (rad * double(mNodes))) / (v - cv.e_tilde(k));
    }
    cplx xpi = cv.x_prime(zi);
    cplx dx = cv.x(z) - cv.x(zi);
    P -= lam * lam * (dtsum / (xpi * dx) + tsum / (dx * dx));
  }
  if (nI == 1 && g == 0) P += lam / ((cv.x(z) - cv.x(I[0])) * (cv.x(z) - cv.x(I[0])));

  // Hcheck / Pcheck from the fiber sums
  std::vector<cplx> tau0 = preimages_x(cv, z);
  std::vector<cplx> tau = tau0;
  tau.insert(tau.begin(), z);
  cplx denomProd = 1;
  for (int k = 0; k < dt; ++k) denomProd *= v - cv.e_tilde(k);

  auto subset_sum = [&](const std::vector<cplx>& pool, int size) {
    cplx acc = 0;
    std::vector<int> idx(size);
    std::function<void(int, int)> rec = [&](int start, int depth2) {
      if (depth2 == size) {
        std::vector<cplx> tset;
        for (int id : idx) tset.push_back(pool[id]);
        acc += e_omega(om, g, tset, I);
        return;
      }
      for (int i = start; i < static_cast<int>(pool.size()); ++i) {
        idx[depth2] = i;
        rec(i + 1, depth2 + 1);
      }
    };
    if (size == 0) {
      acc = e_omega(om, g, {}, I);
    } else {
      rec(0, 0);
    }
    return acc;
  };

  cplx Hcheck = 0;
  for (int i = 0; i <= dt; ++i)
    Hcheck += std::pow(lam, i) * std::pow(v, dt - i) * subset_sum(tau0, i);
  Hcheck *= -1.0 / denomProd;
  cplx Pcheck = 0;
  for (int i = 0; i <= dt + 1; ++i)
    Pcheck += std::pow(lam, i) * std::pow(v, dt + 1 - i) * subset_sum(tau, i);
  Pcheck /= denomProd;

  HPResidual out;
  out.h_residual = std::abs(H - Hcheck);
  out.h_scale = std::max(std::abs(H), std::abs(Hcheck));
  out.p_residual = std::abs(P - Pcheck);
  out.p_scale = std::max(std::abs(P), std::abs(Pcheck));
  return out;
}

std::vector<double> CorrelatorEngine::omega_from_G_residuals(const ModelSpec& spec, int g,
                                                             const std::vector<int>& indices,
                                                             int order) {
  const int n = static_cast<int>(indices.size());
  if (n < 1 || n > 3)
    raise(ErrorCode::InvalidArgument, "omega_from_G_residuals: n must be 1..3");

  const double radius = 1.0 / 64.0;
  int m_nodes = 32;
  while (m_nodes < 4 * (order + 1)) m_nodes *= 2;

  std::vector<cplx> f_tr(m_nodes), f_g(m_nodes);
  for (int j = 0; j < m_nodes; ++j) {
    double th = 2.0 * M_PI * j / m_nodes;
    cplx lam = radius * cplx(std::cos(th), std::sin(th));
    SpectralCurve cv = solve_curve_at(spec, lam);
    RamificationData ram = ramification_points(cv);
    OmegaEvaluator om(cv, ram);
    CorrelatorOptions copt;
    copt.coinciding_limit_mode = true;
    CorrelatorEngine eng(cv, ram, om, copt);

    // recursion side
    if (n == 1) {
      f_tr[j] = (g == 0) ? om.omega1_regularized(indices[0])
                         : om.omega(g, {cv.eps[indices[0]]});
    } else if (n == 2) {
      f_tr[j] = (g == 0) ? om.omega2_regularized(indices[0], indices[1])
                         : om.omega(g, {cv.eps[indices[0]], cv.eps[indices[1]]});
    } else {
      f_tr[j] = om.omega(g, {cv.eps[indices[0]], cv.eps[indices[1]], cv.eps[indices[2]]});
    }

    // correlation-function side
    const int dt = cv.d_tilde();
    cplx val = 0;
    if (n == 1) {
      for (int l = 0; l < dt; ++l)
        val += cv.weight_tilde(l) *
               eng.generalized_T(g, {}, cv.eps[indices[0]], cv.eps_tilde[l], {});
    } else if (n == 2) {
      const int p1 = indices[0], p2 = indices[1];
      if (g == 0) val += 1.0 / ((cv.e(p1) - cv.e(p2)) * (cv.e(p1) - cv.e(p2)));
      for (int l1 = 0; l1 < dt; ++l1)
        for (int l2 = 0; l2 < dt; ++l2)
          val += cv.weight_tilde(l1) * cv.weight_tilde(l2) *
                 eng.full_correlator({g, {}, {{{p1, l1}}, {{p2, l2}}}});
      for (int l = 0; l < dt; ++l)
        val += cv.weight_tilde(l) * eng.full_correlator({g, {}, {{{p1, l}, {p2, l}}}});
    } else {
      const int p1 = indices[0], p2 = indices[1], p3 = indices[2];
      for (int l1 = 0; l1 < dt; ++l1)
        for (int l2 = 0; l2 < dt; ++l2)
          for (int l3 = 0; l3 < dt; ++l3)
            val += cv.weight_tilde(l1) * cv.weight_tilde(l2) * cv.weight_tilde(l3) *
                   eng.full_correlator({g, {}, {{{p1, l1}}, {{p2, l2}}, {{p3, l3}}}});
      const int cyc[3][3] = {{p1, p2, p3}, {p2, p3, p1}, {p3, p1, p2}};
      for (int c = 0; c < 3; ++c)
        for (int l1 = 0; l1 < dt; ++l1)
          for (int l2 = 0; l2 < dt; ++l2)
            val += cv.weight_tilde(l1) * cv.weight_tilde(l2) *
                   eng.full_correlator(
                       {g, {}, {{{cyc[c][0], l1}, {cyc[c][1], l1}}, {{cyc[c][2], l2}}}});
      for (int l = 0; l < dt; ++l)
        val += cv.weight_tilde(l) *
               eng.full_correlator({g, {}, {{{p1, l}, {p2, l}, {p3, l}}}});
    }
    f_g[j] = val;
  }

  std::vector<double> residuals(order + 1);
  for (int k = 0; k <= order; ++k) {
    cplx ctr = 0, cg = 0;
    for (int j = 0; j < m_nodes; ++j) {
      double th = 2.0 * M_PI * j * k / m_nodes;
      cplx rot(std::cos(th), -std::sin(th));
      ctr += f_tr[j] * rot;
      cg += f_g[j] * rot;
    }
    double rk = std::pow(radius, k) * m_nodes;
    residuals[k] = std::abs(ctr - cg) / rk;
  }
  return residuals;
}

H01P01Check check_H01_P01(CorrelatorEngine& eng, cplx z, cplx v) {
  const SpectralCurve& cv = eng.curve();
  const int dt = cv.d_tilde();
  cplx H = -1;
  for (int k = 0; k < dt; ++k)
    H += cv.lambda * cv.weight_tilde(k) * eng.planar_two_point(z, cv.eps_tilde[k]) /
         (v - cv.e_tilde(k));
  cplx P = cv.vtilde_prime(v) + cv.v_prime(cv.x(z));
  for (int k = 0; k < dt; ++k)
    for (int n = 0; n < cv.d(); ++n)
      P += cv.lambda * cv.lambda * cv.weight_tilde(k) * cv.weight(n) *
           eng.planar_two_point(cv.eps[n], cv.eps_tilde[k]) /
           ((v - cv.e_tilde(k)) * (cv.x(z) - cv.e(n)));

  cplx prod = 1;
  for (const auto& zh : preimages_x(cv, z)) prod *= v - cv.y(zh);
  for (int k = 0; k < dt; ++k) prod /= v - cv.e_tilde(k);
  cplx Hclosed = -prod;
  cplx Pclosed = (v - cv.y(z)) * prod;

  H01P01Check out;
  out.h_residual = std::abs(H - Hclosed) / std::max(1.0, std::abs(Hclosed));
  out.p_residual = std::abs(P - Pclosed) / std::max(1.0, std::abs(Pclosed));
  return out;
}

}  // namespace lsz
