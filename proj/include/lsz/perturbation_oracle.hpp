#pragma once

// Brute-force perturbative engine: Wick-contraction enumeration of directed
// ribbon graphs with exact rational weights. Ground truth for every
// lambda-series comparison; never touches floating point.

#include <map>
#include <optional>
#include <vector>

#include "lsz/model.hpp"
#include "lsz/rational_series.hpp"

namespace lsz {

/// One external slot of a boundary cycle. Slots with equal `identity` are
/// the same matrix index (their index deltas are automatically satisfied);
/// slots with different identities are distinct indices even when the
/// eigenvalue classes coincide. `value` overrides the class eigenvalue for
/// analytic continuation in a single slot.
struct OracleLeg {
  int cls = 0;
  int identity = -1;          // default: unique per slot
  std::optional<rat> value;   // default: class value
};

/// Boundary cycles of alternating (E-side, E~-side) legs.
struct OracleCycles {
  std::vector<std::vector<std::pair<OracleLeg, OracleLeg>>> cycles;
};

/// Derivative request: differentiate the weight with respect to eigenvalue
/// values flowing through given identities (slot derivative) and/or whole
/// classes (free-loop sums; combine both for a full spectral derivative).
struct OracleDeriv {
  std::vector<int> e_identities, et_identities;
  std::vector<int> e_classes, et_classes;
  bool empty() const {
    return e_identities.empty() && et_identities.empty() && e_classes.empty() &&
           et_classes.empty();
  }
};

/// Per-genus lambda-series of a connected correlation function (the G
/// normalization of the cycles given), exact rationals.
struct SeriesResult {
  std::map<int, RationalSeries> by_genus;
  int order = 0;

  RationalSeries total() const {
    RationalSeries t(order);
    for (const auto& [g, s] : by_genus) {
      (void)g;
      t += s;
    }
    return t;
  }
  /// Full G at matrix size N (genus-weighted by N^{-2g}).
  RationalSeries at_n(long n) const {
    RationalSeries t(order);
    for (const auto& [g, s] : by_genus) {
      rat w = rat(1);
      for (int i = 0; i < g; ++i) w /= rat(n) * rat(n);
      t += s * w;
    }
    return t;
  }
};

/// Connected cumulant series through order lambda^v_max (v_max <= 4).
SeriesResult cumulant_series(const RationalModel& model, const OracleCycles& cycles, int v_max,
                             const OracleDeriv& deriv = {});

/// Counts of distinct connected labelled directed ribbon graphs per
/// (genus, lambda-order).
std::map<std::pair<int, int>, long long> graph_census(const RationalModel& model,
                                                      const OracleCycles& cycles, int v_max);

/// Residual series of the closed 2-point Dyson-Schwinger equation, assembled
/// entirely from oracle series; must be identically zero. Requires a model
/// with all multiplicities 1 (indices = classes).
RationalSeries dse_series_check(const RationalModel& model, int p, int q, int order);

/// Convenience: 2-point boundary (p-class, q-class) with fresh identities.
OracleCycles two_point_cycles(int p_cls, int q_cls);
/// 4-point single boundary (p1 q1 p2 q2).
OracleCycles four_point_cycles(int p1, int q1, int p2, int q2);
/// 2+2-point, two boundaries.
OracleCycles two_plus_two_cycles(int p1, int q1, int p2, int q2);

}  // namespace lsz
