#include "lsz/perturbation_oracle.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace lsz {

namespace {

struct Field {
  int owner;  // boundary index, or b + vertex index
  int evar;
  int etvar;
};

struct VarInfo {
  int identity = -1;  // -1: free summation variable
  int cls = -1;
  rat value;
};

// Union-find where merging two distinct fixed identities kills the term.
struct VarUF {
  std::vector<int> parent;
  std::vector<int> identity;
  std::vector<int> cls;
  std::vector<rat> value;

  explicit VarUF(const std::vector<VarInfo>& vars) {
    parent.resize(vars.size());
    std::iota(parent.begin(), parent.end(), 0);
    for (const auto& v : vars) {
      identity.push_back(v.identity);
      cls.push_back(v.cls);
      value.push_back(v.value);
    }
  }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  // returns false if the merge forces two distinct matrix indices equal
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return true;
    if (identity[a] >= 0 && identity[b] >= 0 && identity[a] != identity[b]) return false;
    if (identity[a] < 0 && identity[b] >= 0) std::swap(a, b);
    parent[b] = a;  // a keeps (or both lack) the fixed identity
    return true;
  }
};

struct Assembly {
  int b = 0;           // boundary count
  int k_ext = 0;       // external field count
  std::vector<VarInfo> evars, etvars;
  std::vector<Field> phis, dags;
  int n_owner = 0;
};

Assembly build(const RationalModel& rm, const OracleCycles& cycles, int v) {
  Assembly a;
  a.b = static_cast<int>(cycles.cycles.size());
  std::map<int, int> e_by_id, et_by_id;
  int fresh = 10'000'000;  // auto identities for legs that did not set one
  auto fill_identity = [&](OracleLeg leg) {
    if (leg.identity < 0) leg.identity = fresh++;
    return leg;
  };
  auto evar_for = [&](const OracleLeg& leg) {
    auto it = e_by_id.find(leg.identity);
    if (it != e_by_id.end()) return it->second;
    VarInfo vi;
    vi.identity = leg.identity;
    vi.cls = leg.cls;
    vi.value = leg.value ? *leg.value : rm.e.at(leg.cls);
    a.evars.push_back(vi);
    int id = static_cast<int>(a.evars.size()) - 1;
    e_by_id[leg.identity] = id;
    return id;
  };
  auto etvar_for = [&](const OracleLeg& leg) {
    auto it = et_by_id.find(leg.identity);
    if (it != et_by_id.end()) return it->second;
    VarInfo vi;
    vi.identity = leg.identity;
    vi.cls = leg.cls;
    vi.value = leg.value ? *leg.value : rm.e_tilde.at(leg.cls);
    a.etvars.push_back(vi);
    int id = static_cast<int>(a.etvars.size()) - 1;
    et_by_id[leg.identity] = id;
    return id;
  };

  for (int beta = 0; beta < a.b; ++beta) {
    const auto& cyc = cycles.cycles[beta];
    const int m = static_cast<int>(cyc.size());
    std::vector<std::pair<OracleLeg, OracleLeg>> legs;
    for (const auto& [pl, ql] : cyc) legs.push_back({fill_identity(pl), fill_identity(ql)});
    for (int i = 0; i < m; ++i) {
      int p_i = evar_for(legs[i].first);
      int q_i = etvar_for(legs[i].second);
      int p_next = evar_for(legs[(i + 1) % m].first);
      // dJ_{p_i q_i} inserts PhiDag_{q_i p_i}; dJdag_{q_i p_{i+1}} inserts Phi_{p_{i+1} q_i}
      a.dags.push_back({beta, p_i, q_i});
      a.phis.push_back({beta, p_next, q_i});
      a.k_ext += 2;
    }
  }
  for (int vi = 0; vi < v; ++vi) {
    VarInfo free;
    a.evars.push_back(free);
    int j = static_cast<int>(a.evars.size()) - 1;
    a.evars.push_back(free);
    int l = static_cast<int>(a.evars.size()) - 1;
    a.etvars.push_back(free);
    int k = static_cast<int>(a.etvars.size()) - 1;
    a.etvars.push_back(free);
    int m = static_cast<int>(a.etvars.size()) - 1;
    int owner = a.b + vi;
    // vertex cycle Phi_{jk} PhiDag_{kl} Phi_{lm} PhiDag_{mj}
    a.phis.push_back({owner, j, k});
    a.dags.push_back({owner, k, l});
    a.phis.push_back({owner, l, m});
    a.dags.push_back({owner, m, j});
  }
  a.n_owner = a.b + v;
  return a;
}

struct MatchContext {
  const RationalModel* rm;
  const OracleDeriv* deriv;
  Assembly* a;
  int v = 0;
  bool census_only = false;
  // outputs
  std::map<std::pair<int, int>, rat>* weight_out;      // (g, v) -> sum of W~
  std::map<std::pair<int, int>, long long>* count_out;  // (g, v) -> matching count
};

bool has(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

// Evaluate one complete matching.
void eval_matching(MatchContext& ctx, const std::vector<int>& match) {
  Assembly& a = *ctx.a;
  const RationalModel& rm = *ctx.rm;
  const int n_phi = static_cast<int>(a.phis.size());

  VarUF euf(a.evars), etuf(a.etvars);
  std::vector<int> owner_parent(a.n_owner);
  std::iota(owner_parent.begin(), owner_parent.end(), 0);
  std::function<int(int)> ofind = [&](int x) {
    while (owner_parent[x] != x) x = owner_parent[x] = owner_parent[owner_parent[x]];
    return x;
  };

  for (int i = 0; i < n_phi; ++i) {
    const Field& phi = a.phis[i];
    const Field& dag = a.dags[match[i]];
    if (!euf.unite(phi.evar, dag.evar)) return;    // delta on distinct indices
    if (!etuf.unite(phi.etvar, dag.etvar)) return;
    owner_parent[ofind(phi.owner)] = ofind(dag.owner);
  }
  int comps = 0;
  for (int i = 0; i < a.n_owner; ++i)
    if (ofind(i) == i) ++comps;
  if (comps != 1) return;  // disconnected

  // free summation classes
  std::vector<int> free_e, free_et;
  for (std::size_t i = 0; i < a.evars.size(); ++i)
    if (euf.find(static_cast<int>(i)) == static_cast<int>(i) && euf.identity[i] < 0)
      free_e.push_back(static_cast<int>(i));
  for (std::size_t i = 0; i < a.etvars.size(); ++i)
    if (etuf.find(static_cast<int>(i)) == static_cast<int>(i) && etuf.identity[i] < 0)
      free_et.push_back(static_cast<int>(i));
  const int s = static_cast<int>(free_e.size() + free_et.size());

  const int g2 = 2 - a.b - a.k_ext / 2 + ctx.v - s;
  if (g2 % 2 != 0 || g2 < 0)
    raise(ErrorCode::InvalidArgument, "oracle: genus bookkeeping violated");
  const int g = g2 / 2;

  if (ctx.census_only) {
    (*ctx.count_out)[{g, ctx.v}] += 1;
    return;
  }

  // ribbons with resolved roots
  struct Rib {
    int eroot, etroot;
  };
  std::vector<Rib> ribs(n_phi);
  for (int i = 0; i < n_phi; ++i)
    ribs[i] = {euf.find(a.phis[i].evar), etuf.find(a.phis[i].etvar)};

  // assignment of free classes, recursive
  std::vector<int> e_assign(a.evars.size(), -1), et_assign(a.etvars.size(), -1);
  rat total(0);
  const bool want_deriv = ctx.deriv && !ctx.deriv->empty();

  std::function<rat()> weight_now = [&]() {
    rat w(1);
    rat dsum(0);
    for (const auto& rib : ribs) {
      rat ev = (euf.identity[rib.eroot] >= 0) ? euf.value[rib.eroot]
                                              : rm.e[e_assign[rib.eroot]];
      rat etv = (etuf.identity[rib.etroot] >= 0) ? etuf.value[rib.etroot]
                                                 : rm.e_tilde[et_assign[rib.etroot]];
      rat den = ev + etv;
      w /= den;
      if (want_deriv) {
        int hits = 0;
        if (euf.identity[rib.eroot] >= 0) {
          if (has(ctx.deriv->e_identities, euf.identity[rib.eroot])) ++hits;
        } else if (has(ctx.deriv->e_classes, e_assign[rib.eroot])) {
          ++hits;
        }
        if (etuf.identity[rib.etroot] >= 0) {
          if (has(ctx.deriv->et_identities, etuf.identity[rib.etroot])) ++hits;
        } else if (has(ctx.deriv->et_classes, et_assign[rib.etroot])) {
          ++hits;
        }
        if (hits) dsum -= rat(hits) / den;
      }
    }
    return want_deriv ? w * dsum : w;
  };

  std::function<void(std::size_t, rat)> assign = [&](std::size_t idx, rat loops) {
    if (idx == free_e.size() + free_et.size()) {
      total += loops * weight_now();
      return;
    }
    if (idx < free_e.size()) {
      int root = free_e[idx];
      for (int c = 0; c < rm.d(); ++c) {
        e_assign[root] = c;
        assign(idx + 1, loops * rat(rm.r[c]) / rat(rm.n));
      }
      e_assign[root] = -1;
    } else {
      int root = free_et[idx - free_e.size()];
      for (int c = 0; c < rm.d_tilde(); ++c) {
        et_assign[root] = c;
        assign(idx + 1, loops * rat(rm.r_tilde[c]) / rat(rm.n));
      }
      et_assign[root] = -1;
    }
  };
  assign(0, rat(1));

  (*ctx.weight_out)[{g, ctx.v}] += total;
}

void enumerate_matchings(MatchContext& ctx) {
  Assembly& a = *ctx.a;
  const int n_phi = static_cast<int>(a.phis.size());
  if (static_cast<int>(a.dags.size()) != n_phi)
    raise(ErrorCode::InvalidArgument, "oracle: Phi / PhiDag counts differ");
  std::vector<int> match(n_phi, -1);
  std::vector<bool> used(n_phi, false);
  std::function<void(int)> rec = [&](int i) {
    if (i == n_phi) {
      eval_matching(ctx, match);
      return;
    }
    for (int j = 0; j < n_phi; ++j) {
      if (used[j]) continue;
      // cheap pruning: a contraction tying two distinct external indices is zero
      const VarInfo& pe = a.evars[a.phis[i].evar];
      const VarInfo& de = a.evars[a.dags[j].evar];
      if (pe.identity >= 0 && de.identity >= 0 && pe.identity != de.identity) continue;
      const VarInfo& pt = a.etvars[a.phis[i].etvar];
      const VarInfo& dt = a.etvars[a.dags[j].etvar];
      if (pt.identity >= 0 && dt.identity >= 0 && pt.identity != dt.identity) continue;
      used[j] = true;
      match[i] = j;
      rec(i + 1);
      used[j] = false;
    }
  };
  rec(0);
}

rat factorial_pow2(int v) {  // 2^v v!
  rat r(1);
  for (int i = 1; i <= v; ++i) r *= rat(2 * i);
  return r;
}

}  // namespace

SeriesResult cumulant_series(const RationalModel& model, const OracleCycles& cycles, int v_max,
                             const OracleDeriv& deriv) {
  if (v_max > 4) raise(ErrorCode::BudgetExceeded, "oracle: v_max capped at 4");
  SeriesResult out;
  out.order = v_max;
  std::map<std::pair<int, int>, rat> weights;
  for (int v = 0; v <= v_max; ++v) {
    Assembly a = build(model, cycles, v);
    MatchContext ctx;
    ctx.rm = &model;
    ctx.deriv = &deriv;
    ctx.a = &a;
    ctx.v = v;
    ctx.weight_out = &weights;
    enumerate_matchings(ctx);
  }
  for (const auto& [key, w] : weights) {
    auto [g, v] = key;
    auto it = out.by_genus.find(g);
    if (it == out.by_genus.end()) it = out.by_genus.emplace(g, RationalSeries(v_max)).first;
    rat sign = (v % 2 == 0) ? rat(1) : rat(-1);
    it->second[v] += sign * w / factorial_pow2(v);
  }
  return out;
}

std::map<std::pair<int, int>, long long> graph_census(const RationalModel& model,
                                                      const OracleCycles& cycles, int v_max) {
  if (v_max > 4) raise(ErrorCode::BudgetExceeded, "oracle: v_max capped at 4");
  std::map<std::pair<int, int>, long long> counts;
  for (int v = 0; v <= v_max; ++v) {
    Assembly a = build(model, cycles, v);
    MatchContext ctx;
    ctx.rm = &model;
    ctx.deriv = nullptr;
    ctx.a = &a;
    ctx.v = v;
    ctx.census_only = true;
    ctx.count_out = &counts;
    enumerate_matchings(ctx);
  }
  // matchings overcount labelled graphs by the vertex symmetry factor
  std::map<std::pair<int, int>, long long> out;
  for (auto& [key, c] : counts) {
    long long denom = 1;
    for (int i = 1; i <= key.second; ++i) denom *= 2 * i;
    if (c % denom != 0)
      raise(ErrorCode::InvalidArgument, "oracle census: count not divisible by 2^v v!");
    out[key] = c / denom;
  }
  return out;
}

OracleCycles two_point_cycles(int p_cls, int q_cls) {
  OracleCycles c;
  c.cycles = {{{OracleLeg{p_cls, 0, {}}, OracleLeg{q_cls, 0, {}}}}};
  return c;
}

OracleCycles four_point_cycles(int p1, int q1, int p2, int q2) {
  OracleCycles c;
  c.cycles = {{{OracleLeg{p1, 0, {}}, OracleLeg{q1, 0, {}}},
               {OracleLeg{p2, 1, {}}, OracleLeg{q2, 1, {}}}}};
  return c;
}

OracleCycles two_plus_two_cycles(int p1, int q1, int p2, int q2) {
  OracleCycles c;
  c.cycles = {{{OracleLeg{p1, 0, {}}, OracleLeg{q1, 0, {}}}},
              {{OracleLeg{p2, 1, {}}, OracleLeg{q2, 1, {}}}}};
  return c;
}

RationalSeries dse_series_check(const RationalModel& rm, int p, int q, int order) {
  if (order > 3) raise(ErrorCode::BudgetExceeded, "dse_series_check: order capped at 3");
  for (long r : rm.r)
    if (r != 1)
      raise(ErrorCode::InvalidArgument, "dse_series_check: E-side multiplicities must be 1");
  const long n = rm.n;
  const int d = rm.d();

  // identities: E-side identity i <-> class i (mult 1); E~-side identity 100+q for
  // the external q leg, fresh identities elsewhere.
  auto e_leg = [&](int cls) { return OracleLeg{cls, cls, {}}; };
  const int q_id = 1000;
  auto q_leg = [&]() { return OracleLeg{q, q_id, {}}; };

  auto two_point = [&](int first_cls) {
    OracleCycles c;
    c.cycles = {{{e_leg(first_cls), q_leg()}}};
    return cumulant_series(rm, c, order).at_n(n);
  };

  RationalSeries g_pq = two_point(p);

  // Omega_p = (1/N) sum over E~ indices of G_{|pk|}; the value is identity-blind
  RationalSeries omega_p(order);
  for (int l = 0; l < rm.d_tilde(); ++l) {
    OracleCycles c;
    c.cycles = {{{e_leg(p), OracleLeg{l, 2000 + l, {}}}}};
    omega_p += rat(rm.r_tilde[l]) / rat(n) * cumulant_series(rm, c, order).at_n(n);
  }

  // full d/de_p: slot + spectrum
  OracleDeriv full_d;
  full_d.e_identities = {p};
  full_d.e_classes = {p};
  RationalSeries dg_full = [&] {
    OracleCycles c;
    c.cycles = {{{e_leg(p), q_leg()}}};
    return cumulant_series(rm, c, order, full_d).at_n(n);
  }();

  // difference-quotient sum over the other E indices
  RationalSeries quot(order);
  for (int m = 0; m < d; ++m) {
    if (m == p) continue;
    RationalSeries g_mq = two_point(m);
    quot += (g_pq - g_mq) * (rat(1) / (rm.e[m] - rm.e[p]));
  }

  // 2pnew arrangement: (E_p + E~_q) G - 1
  //   + lambda { G Omega_p - (1/N) dG/de_p + (1/N) sum_{m != p} (G - G_mq)/(e_m - e_p) }
  RationalSeries residual =
      g_pq * (rm.e[p] + rm.e_tilde[q]) - RationalSeries(order, rat(1)) +
      (g_pq * omega_p - rat(1) / rat(n) * dg_full + rat(1) / rat(n) * quot).shifted(1);
  return residual;
}

}  // namespace lsz
