#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kokonet {

enum class ErrorCode {
  Domain,
  NotElliptic,
  InvalidSeed,
  OutOfRange,
  NegativeDiscriminant,
  PhaseShiftInconsistent,
  Overflow,
  PropagationDead,
  NonRealAngles,
  Inadmissible,
  DegenerateQuad,
  EmbedInconsistent,
  TooFewSamples,
  Io,
  Schema,
};

std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace kokonet
