#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace covdecomp {

enum class ErrorCode {
  NotPositiveDefinite,
  NoConvergence,
  CompositeNotPD,
  SupportViolation,
  GenerationFailed,
  InvalidInput,
  DualInfeasible,
  SingularGamma,
  IndexOutOfRange,
  DimMismatch,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. The code says which contract was broken; the
/// message carries the detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for failures of the numerics (as opposed to bad input or files).
  bool is_numerical() const noexcept {
    return code_ != ErrorCode::InvalidInput && code_ != ErrorCode::Io &&
           code_ != ErrorCode::DimMismatch && code_ != ErrorCode::IndexOutOfRange;
  }

 private:
  ErrorCode code_;
};

}  // namespace covdecomp
