#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace torusflow {

enum class ErrorKind {
  InvalidArgument,
  ScaleMismatch,
  DomainEscape,
  TruncationBudgetExceeded,
  NonContraction,
  Inadmissible,
  NoPositiveRadius,
  OutOfRange,
  ContractionStall,
  InvertibilityLost,
  EmptyLevel,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so that
/// callers (and the CLI exit-code mapping) can dispatch without parsing text.
class FlowError : public std::runtime_error {
 public:
  FlowError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw FlowError(kind, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace torusflow
