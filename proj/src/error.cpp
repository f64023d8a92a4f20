#include "covdecomp/error.hpp"

namespace covdecomp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::CompositeNotPD: return "CompositeNotPD";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::GenerationFailed: return "GenerationFailed";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::DualInfeasible: return "DualInfeasible";
    case ErrorCode::SingularGamma: return "SingularGamma";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace covdecomp
