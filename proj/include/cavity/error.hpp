#pragma once

#include <stdexcept>
#include <string>

namespace cavity {

enum class Errc {
  NonOddResolution,
  ResolutionOutOfRange,
  BallOutOfBox,
  InvalidDomain,
  GridMismatch,
  NonPositiveEpsilon,
  EmptyIsaacsFamily,
  InadmissibleCoefficients,
  NonPositiveScale,
  StencilLeavesDomain,
  NonMonotoneStencil,
  InvalidStencilConfig,
  InvalidSolverConfig,
  BracketFailure,
  NegativeBoundaryData,
  ShootingBracketFailure,
  EpsilonBelowResolution,
  LevelOutOfRange,
  EmptySet,
  NonVanishingContact,
  NonPositiveField,
  BlowupLeavesDomain,
  SyntaxError,
  UnknownKey,
  RangeError,
  DivisionByZero,
  IoError,
  InvalidArgument,
};

const char* errc_name(Errc code) noexcept;

/// Exception carrying one of the error kinds above. `what()` is
/// "<Kind>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail);

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace cavity
