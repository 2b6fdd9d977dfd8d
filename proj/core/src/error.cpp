#include "kokonet/error.hpp"

namespace kokonet {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Domain: return "DomainError";
    case ErrorCode::NotElliptic: return "NotElliptic";
    case ErrorCode::InvalidSeed: return "InvalidSeed";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NegativeDiscriminant: return "NegativeDiscriminant";
    case ErrorCode::PhaseShiftInconsistent: return "PhaseShiftInconsistent";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::PropagationDead: return "PropagationDead";
    case ErrorCode::NonRealAngles: return "NonRealAngles";
    case ErrorCode::Inadmissible: return "Inadmissible";
    case ErrorCode::DegenerateQuad: return "DegenerateQuad";
    case ErrorCode::EmbedInconsistent: return "EmbedInconsistent";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Schema: return "SchemaError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

}  // namespace kokonet
