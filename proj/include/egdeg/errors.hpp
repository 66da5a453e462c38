#pragma once

#include <stdexcept>
#include <string>

namespace egdeg {

enum class ErrorCode {
  // construction / validation
  NotOrthogonal,
  ClosureOverflow,
  InvalidArgument,
  ConfigError,
  NotInvariant,
  OutsideDomain,
  DomainsOverlap,
  UnknownName,
  UnsupportedRep,
  ZeroOnY,
  TubeTooWide,
  NotInStratum,
  OutOfRange,
  AdditionUndefined,
  // numerics
  IsotropyAmbiguous,
  NoWitness,
  ResolutionTooCoarse,
  AmbiguousProjection,
  TubeSelectionFailed,
  PartitionViolation,
  DegenerateUnresolved,
  DimensionUnsupported,
  MarginTooSmall,
  RefinementOverflow,
  DivisibilityViolation,
};

const char* to_string(ErrorCode code);

/// Validation errors map to CLI exit code 2, numerics errors to 3.
bool is_numerics_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace egdeg
