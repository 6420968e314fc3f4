#include "cantorlab/error.hpp"

namespace cantorlab {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::OverlappingPieces: return "OverlappingPieces";
    case ErrorKind::NonMixingTransitions: return "NonMixingTransitions";
    case ErrorKind::ContractionViolation: return "ContractionViolation";
    case ErrorKind::MarkovViolation: return "MarkovViolation";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::PrecisionLoss: return "PrecisionLoss";
    case ErrorKind::DegenerateCover: return "DegenerateCover";
    case ErrorKind::NoGaps: return "NoGaps";
    case ErrorKind::EmptyTarget: return "EmptyTarget";
    case ErrorKind::NonAffineInput: return "NonAffineInput";
    case ErrorKind::TZeroNotInDifference: return "TZeroNotInDifference";
    case ErrorKind::EstimatorMismatch: return "EstimatorMismatch";
    case ErrorKind::PrecisionExhausted: return "PrecisionExhausted";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::IOError: return "IOError";
  }
  return "Unknown";
}

}  // namespace cantorlab
