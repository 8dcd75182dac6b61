#pragma once

#include <stdexcept>
#include <string>

namespace cinderella {

enum class ErrorCode {
  InvalidEpsilon,
  DimensionZero,
  OutOfDomain,
  NonPositiveNu,
  NonPositiveLambda,
  NonFiniteInput,
  BetaOutOfRange,
  InvalidTheta,
  InvalidParameter,
  InvalidReward,
  PolicyOutOfRange,
  InstanceTooLarge,
  DensityUnavailable,
  ResolutionTooSmall,
  OracleTooLarge,
  ConfigInvalid,
};

const char* to_string(ErrorCode code);

/// Exception carrying a machine-checkable error kind.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace cinderella
