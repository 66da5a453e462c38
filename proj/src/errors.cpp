#include "egdeg/errors.hpp"

namespace egdeg {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotOrthogonal: return "NotOrthogonal";
    case ErrorCode::ClosureOverflow: return "ClosureOverflow";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::NotInvariant: return "NotInvariant";
    case ErrorCode::OutsideDomain: return "OutsideDomain";
    case ErrorCode::DomainsOverlap: return "DomainsOverlap";
    case ErrorCode::UnknownName: return "UnknownName";
    case ErrorCode::UnsupportedRep: return "UnsupportedRep";
    case ErrorCode::ZeroOnY: return "ZeroOnY";
    case ErrorCode::TubeTooWide: return "TubeTooWide";
    case ErrorCode::NotInStratum: return "NotInStratum";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::AdditionUndefined: return "AdditionUndefined";
    case ErrorCode::IsotropyAmbiguous: return "IsotropyAmbiguous";
    case ErrorCode::NoWitness: return "NoWitness";
    case ErrorCode::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorCode::AmbiguousProjection: return "AmbiguousProjection";
    case ErrorCode::TubeSelectionFailed: return "TubeSelectionFailed";
    case ErrorCode::PartitionViolation: return "PartitionViolation";
    case ErrorCode::DegenerateUnresolved: return "DegenerateUnresolved";
    case ErrorCode::DimensionUnsupported: return "DimensionUnsupported";
    case ErrorCode::MarginTooSmall: return "MarginTooSmall";
    case ErrorCode::RefinementOverflow: return "RefinementOverflow";
    case ErrorCode::DivisibilityViolation: return "DivisibilityViolation";
  }
  return "UnknownError";
}

bool is_numerics_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::IsotropyAmbiguous:
    case ErrorCode::NoWitness:
    case ErrorCode::ResolutionTooCoarse:
    case ErrorCode::AmbiguousProjection:
    case ErrorCode::TubeSelectionFailed:
    case ErrorCode::PartitionViolation:
    case ErrorCode::DegenerateUnresolved:
    case ErrorCode::DimensionUnsupported:
    case ErrorCode::MarginTooSmall:
    case ErrorCode::RefinementOverflow:
    case ErrorCode::DivisibilityViolation:
      return true;
    default:
      return false;
  }
}

}  // namespace egdeg
