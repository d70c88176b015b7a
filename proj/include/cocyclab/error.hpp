#pragma once

#include <stdexcept>
#include <string>

namespace cocyclab {

enum class ErrorCode {
  DegenerateAxes,
  LogDomain,
  Overflow,
  EmptyCell,
  HorizonExceeded,
  Unsupported,
  BudgetExhausted,
  NoBalancedIndex,
  SteeringFailed,
  CoveringFailed,
  CertificationFailed,
  SearchFailed,
  NotRepresentable,
  DisjointnessFailed,
  ShrinkExhausted,
  ResolutionExceeded,
  NotApplicable,
  BlendBoundViolated,
  DecompositionFailed,
  LiftFailed,
  InvalidArgument,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above; the C
// API maps them one-to-one onto status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cocyclab
