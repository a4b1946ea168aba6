#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ccrci {

enum class ErrorCode {
  ShapeMismatch,
  Unbounded,
  Empty,
  DimensionTooLarge,
  DegenerateHull,
  BadComplexity,
  BudgetExceeded,
  NotEntirelySimple,
  AsymmetricDisturbanceSet,
  ParseError,
  LengthMismatch,
  ScheduleOutsideSet,
  NumericalBreakdown,
  PluginUnavailable,
  EmptyModelSet,
  StateOutsideSet,
  InvalidConfig,
  SynthesisInfeasible,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a domain error code. Solver outcomes such as an
/// infeasible synthesis are reported through status values, not this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ccrci
