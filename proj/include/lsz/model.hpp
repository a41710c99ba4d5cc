#pragma once

// Model specification, validation, canonicalization and JSON (de)serialization.

#include <string>
#include <utility>
#include <vector>

#include "lsz/errors.hpp"
#include "lsz/rational_series.hpp"

namespace lsz {

/// External-field data of the quartic two-field matrix model: distinct
/// eigenvalues with multiplicities for both fields, coupling, matrix size.
struct ModelSpec {
  struct Eigenvalue {
    double value = 0;
    long mult = 0;
  };
  std::vector<Eigenvalue> e;        // eigenvalues of E
  std::vector<Eigenvalue> e_tilde;  // eigenvalues of E~
  double lambda = 0;
  long n = 0;  // matrix size N

  int d() const { return static_cast<int>(e.size()); }
  int d_tilde() const { return static_cast<int>(e_tilde.size()); }
};

struct ValidateOptions {
  /// Enforce strictly positive eigenvalues and lambda >= 0. Disabled for
  /// e.g. the one-cut regulator limit (an eigenvalue pinned at 0) and for
  /// coupling continuation into the complex plane.
  bool strict_positive = true;
};

/// Returns the canonical spec (eigenvalues sorted ascending) or raises
/// MultiplicityMismatch / DuplicateEigenvalue / NonPositiveInput.
ModelSpec validate(const ModelSpec& spec, const ValidateOptions& opt = {});

ModelSpec model_from_json(const std::string& json_text);
std::string model_to_json(const ModelSpec& spec);
ModelSpec load_model(const std::string& path);

/// Exact-rational mirror of a ModelSpec. Doubles convert exactly (binary
/// rationals), so the series/oracle results are exact for the spec as given.
struct RationalModel {
  std::vector<rat> e, e_tilde;
  std::vector<long> r, r_tilde;
  long n = 0;

  int d() const { return static_cast<int>(e.size()); }
  int d_tilde() const { return static_cast<int>(e_tilde.size()); }
};

RationalModel to_rational(const ModelSpec& spec);
rat exact_rational(double x);

}  // namespace lsz
