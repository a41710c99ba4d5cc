#pragma once

#include <stdexcept>
#include <string>

namespace lsz {

/// Error taxonomy shared by all modules. Every failure mode raised by the
/// library carries one of these codes so callers (CLI, bindings, tests) can
/// react without string matching.
enum class ErrorCode {
  NonConvergence,
  PoleEvaluation,
  BranchCollision,
  DegenerateRamification,
  BranchEscape,
  FiberDegeneracy,
  MultiplicityMismatch,
  DuplicateEigenvalue,
  NonPositiveInput,
  PointTooCloseToBranchPoint,
  ResidueNotZero,
  CoincidingIndices,
  DepthExceeded,
  IllConditioned,
  RoundingGuard,
  BranchCut,
  BranchChoice,
  BudgetExceeded,
  InvalidArgument,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::PoleEvaluation: return "PoleEvaluation";
    case ErrorCode::BranchCollision: return "BranchCollision";
    case ErrorCode::DegenerateRamification: return "DegenerateRamification";
    case ErrorCode::BranchEscape: return "BranchEscape";
    case ErrorCode::FiberDegeneracy: return "FiberDegeneracy";
    case ErrorCode::MultiplicityMismatch: return "MultiplicityMismatch";
    case ErrorCode::DuplicateEigenvalue: return "DuplicateEigenvalue";
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::PointTooCloseToBranchPoint: return "PointTooCloseToBranchPoint";
    case ErrorCode::ResidueNotZero: return "ResidueNotZero";
    case ErrorCode::CoincidingIndices: return "CoincidingIndices";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::RoundingGuard: return "RoundingGuard";
    case ErrorCode::BranchCut: return "BranchCut";
    case ErrorCode::BranchChoice: return "BranchChoice";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(error_code_name(code)) + ": " + what);
}

}  // namespace lsz
