#pragma once

#include <stdexcept>
#include <string>

namespace qbn {

enum class Errc {
  IndexOutOfRange,
  SelfEdge,
  CycleDetected,
  SetsNotDisjoint,
  ScopeMismatch,
  ScopePartitionInvalid,
  JointStateLimitExceeded,
  ZeroConditionMass,
  ZeroDenominator,
  NotNormalized,
  NotSquare,
  NotHermitian,
  NegativeEigenvalueBeyondTolerance,
  TraceNotOne,
  MissingValue,
  ZeroReferenceAmplitude,
  ZeroAmplitudeStrictMode,
  GroundSetTooLarge,
  GraphTooLargeForGlobalEnumeration,
  UnnormalizedNodeTable,
  AllZeroAffinityProduct,
  NotAllEncompassing,
  ToleranceInconsistency,
  InvalidKind,
  SyntaxError,
  ValidationError,
  UnknownCheck,
  UsageError,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::SelfEdge: return "SelfEdge";
    case Errc::CycleDetected: return "CycleDetected";
    case Errc::SetsNotDisjoint: return "SetsNotDisjoint";
    case Errc::ScopeMismatch: return "ScopeMismatch";
    case Errc::ScopePartitionInvalid: return "ScopePartitionInvalid";
    case Errc::JointStateLimitExceeded: return "JointStateLimitExceeded";
    case Errc::ZeroConditionMass: return "ZeroConditionMass";
    case Errc::ZeroDenominator: return "ZeroDenominator";
    case Errc::NotNormalized: return "NotNormalized";
    case Errc::NotSquare: return "NotSquare";
    case Errc::NotHermitian: return "NotHermitian";
    case Errc::NegativeEigenvalueBeyondTolerance: return "NegativeEigenvalueBeyondTolerance";
    case Errc::TraceNotOne: return "TraceNotOne";
    case Errc::MissingValue: return "MissingValue";
    case Errc::ZeroReferenceAmplitude: return "ZeroReferenceAmplitude";
    case Errc::ZeroAmplitudeStrictMode: return "ZeroAmplitudeStrictMode";
    case Errc::GroundSetTooLarge: return "GroundSetTooLarge";
    case Errc::GraphTooLargeForGlobalEnumeration: return "GraphTooLargeForGlobalEnumeration";
    case Errc::UnnormalizedNodeTable: return "UnnormalizedNodeTable";
    case Errc::AllZeroAffinityProduct: return "AllZeroAffinityProduct";
    case Errc::NotAllEncompassing: return "NotAllEncompassing";
    case Errc::ToleranceInconsistency: return "ToleranceInconsistency";
    case Errc::InvalidKind: return "InvalidKind";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::UnknownCheck: return "UnknownCheck";
    case Errc::UsageError: return "UsageError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace qbn
