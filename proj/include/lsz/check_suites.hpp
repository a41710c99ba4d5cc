#pragma once

// The acceptance checks as library functions, shared by the `check` CLI
// subcommand and the acceptance test binary. Every check returns a list of
// per-item results with its measured residual and the pinned threshold.

#include <functional>
#include <string>
#include <vector>

#include "lsz/model.hpp"
#include "lsz/spectral_curve.hpp"

namespace lsz {

struct CheckItem {
  std::string name;
  double residual = 0;
  double threshold = 0;
  bool pass = false;
};

struct CheckReport {
  std::string suite;
  std::vector<CheckItem> items;
  bool all_pass() const {
    for (const auto& i : items)
      if (!i.pass) return false;
    return !items.empty();
  }
};

// criterion 1: all six map-count columns, exact integers, |raw-int| < 1e-3
CheckReport check_map_counts(int precision_bits = 53, int threads = 0);
// criterion 2: Tutte numbers through order 4, relative 1e-6
CheckReport check_tutte();
// criterion 3: lambda-coefficients vs the ribbon oracle (d=2, d~=2 spec)
CheckReport check_oracle_equivalence();
// criterion 4: loop equations at seeded points, 1e-7 * scale
CheckReport check_loop_equations_suite(unsigned long long seed);
// criterion 5: 2-point DSE residuals + exact-rational series DSE
CheckReport check_dse(unsigned long long seed);
// criterion 6: H/P closed forms and H = Hcheck, P = Pcheck
CheckReport check_hp(unsigned long long seed);
// criterion 7: one-cut limit and comb-limit closed forms
CheckReport check_limits(unsigned long long seed);
// criterion 8: boundary creation vs finite-difference curve re-solve
CheckReport check_boundary_creation();
// criterion 9: symmetry, vanishing residues, free-energy stability
CheckReport check_structure(unsigned long long seed);

/// Runs one named suite ("map-counts", "tutte", "oracle", "loop-equations",
/// "dse", "hp", "limits", "boundary-creation", "structure", or "all").
std::vector<CheckReport> run_suite(const std::string& name, unsigned long long seed,
                                   int precision_bits = 53, int threads = 0);

std::string format_report(const CheckReport& report);

/// Deterministic generic test points away from the curve's singular set.
std::vector<cplx> seeded_points(const SpectralCurve& cv, int count,
                                unsigned long long seed, double min_clearance = 0.25);

}  // namespace lsz
