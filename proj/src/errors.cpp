#include "torusflow/errors.hpp"

namespace torusflow {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ScaleMismatch: return "ScaleMismatch";
    case ErrorKind::DomainEscape: return "DomainEscape";
    case ErrorKind::TruncationBudgetExceeded: return "TruncationBudgetExceeded";
    case ErrorKind::NonContraction: return "NonContraction";
    case ErrorKind::Inadmissible: return "Inadmissible";
    case ErrorKind::NoPositiveRadius: return "NoPositiveRadius";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::ContractionStall: return "ContractionStall";
    case ErrorKind::InvertibilityLost: return "InvertibilityLost";
    case ErrorKind::EmptyLevel: return "EmptyLevel";
  }
  return "Unknown";
}

}  // namespace torusflow
