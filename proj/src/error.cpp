#include "cavity/error.hpp"

namespace cavity {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::NonOddResolution: return "NonOddResolution";
    case Errc::ResolutionOutOfRange: return "ResolutionOutOfRange";
    case Errc::BallOutOfBox: return "BallOutOfBox";
    case Errc::InvalidDomain: return "InvalidDomain";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::NonPositiveEpsilon: return "NonPositiveEpsilon";
    case Errc::EmptyIsaacsFamily: return "EmptyIsaacsFamily";
    case Errc::InadmissibleCoefficients: return "InadmissibleCoefficients";
    case Errc::NonPositiveScale: return "NonPositiveScale";
    case Errc::StencilLeavesDomain: return "StencilLeavesDomain";
    case Errc::NonMonotoneStencil: return "NonMonotoneStencil";
    case Errc::InvalidStencilConfig: return "InvalidStencilConfig";
    case Errc::InvalidSolverConfig: return "InvalidSolverConfig";
    case Errc::BracketFailure: return "BracketFailure";
    case Errc::NegativeBoundaryData: return "NegativeBoundaryData";
    case Errc::ShootingBracketFailure: return "ShootingBracketFailure";
    case Errc::EpsilonBelowResolution: return "EpsilonBelowResolution";
    case Errc::LevelOutOfRange: return "LevelOutOfRange";
    case Errc::EmptySet: return "EmptySet";
    case Errc::NonVanishingContact: return "NonVanishingContact";
    case Errc::NonPositiveField: return "NonPositiveField";
    case Errc::BlowupLeavesDomain: return "BlowupLeavesDomain";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::UnknownKey: return "UnknownKey";
    case Errc::RangeError: return "RangeError";
    case Errc::DivisionByZero: return "DivisionByZero";
    case Errc::IoError: return "IoError";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
      code_(code),
      detail_(detail) {}

}  // namespace cavity
